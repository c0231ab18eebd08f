//! Exact cosine nearest neighbours and their stability under a transform.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// For each sample, the `k` other samples with the largest cosine, best
/// first. Ties go to the lower index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborLists {
    k: usize,
    lists: Vec<Vec<usize>>,
}

impl NeighborLists {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn list(&self, i: usize) -> &[usize] {
        &self.lists[i]
    }

    pub fn lists(&self) -> &[Vec<usize>] {
        &self.lists
    }
}

pub fn knn_cosine(cos: &Matrix, k: usize) -> Result<NeighborLists> {
    if !cos.is_square() {
        return Err(Error::shape("cosine matrix must be square"));
    }
    let n = cos.rows();
    if k == 0 || k >= n {
        return Err(Error::domain(format!("need 1 <= k < n, got k={k}, n={n}")));
    }
    let lists = (0..n)
        .map(|i| {
            let row = cos.row(i);
            let mut cand: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            cand.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            cand.truncate(k);
            cand
        })
        .collect();
    Ok(NeighborLists { k, lists })
}

fn check_pair(a: &NeighborLists, b: &NeighborLists) -> Result<()> {
    if a.len() != b.len() || a.k != b.k {
        return Err(Error::shape(format!(
            "neighbor lists (n={}, k={}) vs (n={}, k={})",
            a.len(),
            a.k,
            b.len(),
            b.k
        )));
    }
    Ok(())
}

/// Mean over queries of `|A_i ∩ B_i| / |A_i ∪ B_i|`.
pub fn jaccard_at_k(a: &NeighborLists, b: &NeighborLists) -> Result<f64> {
    check_pair(a, b)?;
    let total: f64 = a
        .lists
        .iter()
        .zip(&b.lists)
        .map(|(la, lb)| {
            let sa: HashSet<usize> = la.iter().copied().collect();
            let inter = lb.iter().filter(|j| sa.contains(j)).count();
            let union = la.len() + lb.len() - inter;
            inter as f64 / union as f64
        })
        .sum();
    Ok(total / a.len() as f64)
}

/// Fraction of queries whose nearest neighbour changed.
pub fn top1_flip_rate(a: &NeighborLists, b: &NeighborLists) -> Result<f64> {
    check_pair(a, b)?;
    let flips = a.lists.iter().zip(&b.lists).filter(|(x, y)| x[0] != y[0]).count();
    Ok(flips as f64 / a.len() as f64)
}
