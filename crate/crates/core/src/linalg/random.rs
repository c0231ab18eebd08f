use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::linalg::matrix::dot;
use crate::linalg::Matrix;

/// The crate-wide random source. Seeds are expanded with splitmix64.
pub type SeededRng = Xoshiro256PlusPlus;

pub fn seeded_rng(seed: u64) -> SeededRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Orthogonal factor of a Gaussian matrix, with the sign convention that the
/// triangular factor has a positive diagonal.
pub fn random_orthogonal(d: usize, seed: u64) -> Result<Matrix> {
    random_orthogonal_with(d, &mut seeded_rng(seed))
}

pub fn random_orthogonal_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Matrix> {
    if d == 0 {
        return Err(Error::domain("orthogonal matrix of dimension 0"));
    }
    let g = gaussian_matrix(d, d, rng);
    Ok(orthonormalize_columns(&g))
}

/// Modified Gram-Schmidt with one reorthogonalization pass. Each column keeps
/// a positive projection onto its input column, i.e. `A = QR` with `diag(R) > 0`.
///
/// Panics on (numerically) dependent columns, which has probability zero for
/// Gaussian input.
fn orthonormalize_columns(a: &Matrix) -> Matrix {
    let (m, n) = a.shape();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = a.column(j);
        for _ in 0..2 {
            for qk in &q {
                let proj = dot(qk, &v);
                for (x, y) in v.iter_mut().zip(qk) {
                    *x -= proj * y;
                }
            }
        }
        let len = dot(&v, &v).sqrt();
        assert!(len > 1e-12, "dependent columns in orthonormalization");
        q.push(v.into_iter().map(|x| x / len).collect());
    }
    Matrix::from_fn(m, n, |i, j| q[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_is_sign() {
        let q = random_orthogonal(1, 3).unwrap();
        assert_eq!(q[(0, 0)].abs(), 1.0);
    }

    #[test]
    fn orthonormal_and_deterministic() {
        let q = random_orthogonal(5, 7).unwrap();
        assert!(q.t_matmul(&q).max_abs_diff(&Matrix::identity(5)) <= 1e-10);
        assert_eq!(q, random_orthogonal(5, 7).unwrap());
        assert_ne!(q, random_orthogonal(5, 8).unwrap());
    }

    #[test]
    fn positive_triangular_diagonal() {
        let mut rng = seeded_rng(11);
        let g = gaussian_matrix(4, 4, &mut rng);
        let q = orthonormalize_columns(&g);
        // R = Qᵀ G is upper triangular with positive diagonal.
        let r = q.t_matmul(&g);
        for i in 0..4 {
            assert!(r[(i, i)] > 0.0);
            for j in 0..i {
                assert!(r[(i, j)].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(random_orthogonal(0, 1).is_err());
    }
}
