//! Coordinate-dependent and canonical geometry of representation sets.

mod features;
mod io;

pub use features::{feature_gram, interference, FeatureBasis};
pub use io::{read_reps_csv, write_reps_csv};

use crate::error::{Error, Result};
use crate::linalg::{
    default_eps, inv_sqrt_psd, sym_eig, GaugeKind, GaugeTransform, Matrix, Spectrum, PSD_SLACK,
};

/// Columns with a norm below this cannot be given a direction.
pub const ZERO_NORM: f64 = 1e-12;

/// Bin count of the cosine histograms in [`GeometryReport`].
pub const HIST_BINS: usize = 40;

/// Hidden states `H` (one column per sample) with optional labels.
#[derive(Debug, Clone)]
pub struct RepresentationSet {
    h: Matrix,
    labels: Option<Vec<usize>>,
}

impl RepresentationSet {
    pub fn new(h: Matrix, labels: Option<Vec<usize>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != h.cols() {
                return Err(Error::shape(format!(
                    "{} labels for {} samples",
                    l.len(),
                    h.cols()
                )));
            }
        }
        if !h.is_finite() {
            return Err(Error::Degenerate("representation has non-finite entries".into()));
        }
        Ok(RepresentationSet { h, labels })
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn len(&self) -> usize {
        self.h.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.h.cols() == 0
    }

    pub fn matrix(&self) -> &Matrix {
        &self.h
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn sample(&self, i: usize) -> Vec<f64> {
        self.h.column(i)
    }

    /// `D · H`, keeping labels.
    pub fn transformed(&self, d: &Matrix) -> Result<RepresentationSet> {
        Ok(RepresentationSet {
            h: d.try_matmul(&self.h)?,
            labels: self.labels.clone(),
        })
    }

    pub fn gauged(&self, g: &GaugeTransform) -> Result<RepresentationSet> {
        self.transformed(g.matrix())
    }

    /// Subtracts the per-coordinate mean across samples.
    pub fn centered(&self) -> Matrix {
        center_rows(&self.h)
    }
}

pub(crate) fn center_rows(h: &Matrix) -> Matrix {
    let n = h.cols() as f64;
    let means: Vec<f64> = (0..h.rows()).map(|i| h.row(i).iter().sum::<f64>() / n).collect();
    Matrix::from_fn(h.rows(), h.cols(), |i, j| h[(i, j)] - means[i])
}

/// Whether [`covariance`] subtracts the sample mean first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Centering {
    #[default]
    Centered,
    /// `E[h hᵀ]` about the origin.
    Uncentered,
}

/// A symmetric positive semidefinite inner-product matrix.
#[derive(Debug, Clone)]
pub struct MetricTensor {
    g: Matrix,
}

impl MetricTensor {
    pub fn new(g: Matrix) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::shape("metric tensor must be square"));
        }
        let spec = sym_eig(&g)?;
        let scale = spec.values[0].abs().max(spec.min().abs());
        if spec.min() < -PSD_SLACK * scale {
            return Err(Error::NotPsd {
                min_eig: spec.min(),
            });
        }
        Ok(MetricTensor { g })
    }

    /// `Dᵀ D`, the metric a gauge `D` induces on the original coordinates.
    pub fn pullback(d: &Matrix) -> Self {
        MetricTensor { g: d.t_matmul(d) }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        crate::linalg::dot(u, &self.g.mul_vec(v))
    }
}

/// Pairwise cosine similarity of the samples (columns). Exactly symmetric
/// with a unit diagonal.
pub fn cosine_matrix(r: &RepresentationSet) -> Result<Matrix> {
    let n = r.len();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| r.sample(j)).collect();
    let mut norms = Vec::with_capacity(n);
    for (j, c) in cols.iter().enumerate() {
        let len = crate::linalg::norm(c);
        if len < ZERO_NORM {
            return Err(Error::DegenerateVector { column: j });
        }
        norms.push(len);
    }
    let mut out = Matrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let c = crate::linalg::dot(&cols[i], &cols[j]) / (norms[i] * norms[j]);
            out[(i, j)] = c;
            out[(j, i)] = c;
        }
    }
    Ok(out)
}

/// `uᵀGv / (√(uᵀGu) · √(vᵀGv))`.
pub fn metric_cosine(u: &[f64], v: &[f64], g: &MetricTensor) -> Result<f64> {
    if u.len() != g.dim() || v.len() != g.dim() {
        return Err(Error::shape(format!(
            "vectors of length {} and {} against a {}-dim metric",
            u.len(),
            v.len(),
            g.dim()
        )));
    }
    let uu = g.inner(u, u);
    let vv = g.inner(v, v);
    for value in [uu, vv] {
        if !(value > 0.0) {
            return Err(Error::DegenerateMetric { value });
        }
    }
    Ok(g.inner(u, v) / (uu.sqrt() * vv.sqrt()))
}

/// Sample covariance with a `1/n` normalization.
pub fn covariance(r: &RepresentationSet, centering: Centering) -> Result<Matrix> {
    let n = r.len();
    if n < 2 {
        return Err(Error::SampleCount { n });
    }
    let h = match centering {
        Centering::Centered => r.centered(),
        Centering::Uncentered => r.matrix().clone(),
    };
    Ok(h.gram_rows().scale(1.0 / n as f64))
}

/// Maps `R` to coordinates with identity (centered) covariance.
///
/// `eps` regularizes the inverse square root; `None` uses
/// [`default_eps`] of the covariance.
pub fn whiten(
    r: &RepresentationSet,
    eps: Option<f64>,
) -> Result<(RepresentationSet, GaugeTransform)> {
    let sigma = covariance(r, Centering::Centered)?;
    let eps = eps.unwrap_or_else(|| default_eps(&sigma));
    let d = inv_sqrt_psd(&sigma, eps)?;
    let spec = sym_eig(&sigma)?;
    let d_inv = spec.reconstruct_with(|l| (l.max(0.0) + eps).sqrt());
    let gauge = GaugeTransform::from_parts(d, d_inv, GaugeKind::Whitening)?;
    Ok((r.gauged(&gauge)?, gauge))
}

/// Cosine matrix in whitened coordinates. Invariant under any invertible
/// gauge applied to `R`, since whitened coordinates are fixed up to a rotation.
pub fn canonical_cosine(r: &RepresentationSet) -> Result<Matrix> {
    let (w, _) = whiten(r, None)?;
    cosine_matrix(&w)
}

/// Distortion between two cosine matrices over pairs `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryReport {
    pub mean_abs_dcos: f64,
    pub max_abs_dcos: f64,
    pub cos_histogram_before: Vec<u64>,
    pub cos_histogram_after: Vec<u64>,
}

/// Index of the histogram bin holding cosine `c` in [−1, 1].
pub fn hist_bin(c: f64) -> usize {
    let idx = ((c + 1.0) / 2.0 * HIST_BINS as f64).floor();
    idx.clamp(0.0, (HIST_BINS - 1) as f64) as usize
}

pub fn delta_cos_stats(before: &Matrix, after: &Matrix) -> Result<GeometryReport> {
    if before.shape() != after.shape() || !before.is_square() {
        return Err(Error::shape(format!(
            "cosine matrices {:?} and {:?}",
            before.shape(),
            after.shape()
        )));
    }
    let n = before.rows();
    if n < 2 {
        return Err(Error::SampleCount { n });
    }
    let mut sum = 0.0;
    let mut max = 0.0f64;
    let mut hb = vec![0u64; HIST_BINS];
    let mut ha = vec![0u64; HIST_BINS];
    for i in 0..n {
        for j in (i + 1)..n {
            let (b, a) = (before[(i, j)], after[(i, j)]);
            let d = (a - b).abs();
            sum += d;
            max = max.max(d);
            hb[hist_bin(b)] += 1;
            ha[hist_bin(a)] += 1;
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(GeometryReport {
        mean_abs_dcos: sum / pairs,
        max_abs_dcos: max,
        cos_histogram_before: hb,
        cos_histogram_after: ha,
    })
}

/// Eigenvalues (descending) and eigenvectors of the covariance.
pub fn spectrum_report(r: &RepresentationSet, centering: Centering) -> Result<Spectrum> {
    sym_eig(&covariance(r, centering)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, make_gauge, seeded_rng};

    fn reps(cols: &[Vec<f64>]) -> RepresentationSet {
        RepresentationSet::new(Matrix::from_columns(cols).unwrap(), None).unwrap()
    }

    #[test]
    fn cosine_hand_values() {
        let c = cosine_matrix(&reps(&[vec![1.0, 0.0], vec![0.0, 1.0]])).unwrap();
        assert_eq!(c, Matrix::identity(2));
        let c = cosine_matrix(&reps(&[vec![1.0, 0.0], vec![1.0, 1.0]])).unwrap();
        assert!((c[(0, 1)] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(c.diagonal(), vec![1.0, 1.0]);
    }

    #[test]
    fn cosine_rejects_zero_column() {
        let r = reps(&[vec![1.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0]]);
        assert!(matches!(
            cosine_matrix(&r),
            Err(Error::DegenerateVector { column: 1 })
        ));
    }

    #[test]
    fn metric_cosine_hand_values() {
        let u = [1.0, 1.0];
        let v = [1.0, -1.0];
        let id = MetricTensor::new(Matrix::identity(2)).unwrap();
        assert_eq!(metric_cosine(&u, &v, &id).unwrap(), 0.0);
        let g = MetricTensor::new(Matrix::from_diag(&[4.0, 1.0])).unwrap();
        assert!((metric_cosine(&u, &v, &g).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn metric_cosine_degenerate() {
        let g = MetricTensor::new(Matrix::from_diag(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            metric_cosine(&[0.0, 1.0], &[1.0, 0.0], &g),
            Err(Error::DegenerateMetric { .. })
        ));
        assert!(MetricTensor::new(Matrix::from_diag(&[1.0, -1.0])).is_err());
        assert!(metric_cosine(&[1.0], &[1.0, 0.0], &g).is_err());
    }

    #[test]
    fn pullback_cosine_matches_transformed_cosine() {
        let d = make_gauge(3, 7.0, GaugeKind::General, 2).unwrap();
        let u = [0.3, -1.2, 0.5];
        let v = [1.0, 0.1, -0.4];
        let du = d.matrix().mul_vec(&u);
        let dv = d.matrix().mul_vec(&v);
        let direct = crate::linalg::dot(&du, &dv) / (crate::linalg::norm(&du) * crate::linalg::norm(&dv));
        let g = MetricTensor::pullback(d.matrix());
        assert!((metric_cosine(&u, &v, &g).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn covariance_cases() {
        let same = reps(&[vec![2.0, 3.0], vec![2.0, 3.0], vec![2.0, 3.0]]);
        assert_eq!(covariance(&same, Centering::Centered).unwrap(), Matrix::zeros(2, 2));
        let pm = reps(&[vec![1.0, 0.0], vec![-1.0, 0.0]]);
        assert_eq!(
            covariance(&pm, Centering::Uncentered).unwrap(),
            Matrix::from_diag(&[1.0, 0.0])
        );
        assert_eq!(
            covariance(&pm, Centering::Centered).unwrap(),
            Matrix::from_diag(&[1.0, 0.0])
        );
        let one = reps(&[vec![1.0, 0.0]]);
        assert!(matches!(
            covariance(&one, Centering::Centered),
            Err(Error::SampleCount { n: 1 })
        ));
    }

    #[test]
    fn whitening_scalar_case() {
        // x-coordinate ±2, y-coordinate ±1 in all four combinations: cov = diag(4, 1)
        let r = reps(&[
            vec![2.0, 1.0],
            vec![2.0, -1.0],
            vec![-2.0, 1.0],
            vec![-2.0, -1.0],
        ]);
        let (w, g) = whiten(&r, Some(0.0)).unwrap();
        assert!(g.matrix().max_abs_diff(&Matrix::from_diag(&[0.5, 1.0])) < 1e-15);
        assert_eq!(g.kind(), GaugeKind::Whitening);
        let cov = covariance(&w, Centering::Centered).unwrap();
        assert!(cov.max_abs_diff(&Matrix::identity(2)) < 1e-14);
    }

    #[test]
    fn isotropic_whitening_is_identity() {
        let r = reps(&[
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
        ]);
        let (_, g) = whiten(&r, None).unwrap();
        assert!(g.matrix().max_abs_diff(&Matrix::identity(2)) < 1e-8);
        let can = canonical_cosine(&r).unwrap();
        assert!(can.max_abs_diff(&cosine_matrix(&r).unwrap()) < 1e-8);
        assert_eq!(can.diagonal(), vec![1.0; 4]);
    }

    #[test]
    fn canonical_cosine_is_gauge_invariant() {
        let mut rng = seeded_rng(4);
        let h = gaussian_matrix(5, 40, &mut rng);
        let r = RepresentationSet::new(h, None).unwrap();
        let base = canonical_cosine(&r).unwrap();
        for seed in 0..3 {
            let g = make_gauge(5, 50.0, GaugeKind::General, seed).unwrap();
            let moved = canonical_cosine(&r.gauged(&g).unwrap()).unwrap();
            assert!(moved.max_abs_diff(&base) < 1e-9);
        }
    }

    #[test]
    fn delta_cos_cases() {
        let c = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let rep = delta_cos_stats(&c, &c).unwrap();
        assert_eq!((rep.mean_abs_dcos, rep.max_abs_dcos), (0.0, 0.0));
        assert_eq!(rep.cos_histogram_before.iter().sum::<u64>(), 1);
        assert_eq!(rep.cos_histogram_before[hist_bin(0.5)], 1);
        assert!(delta_cos_stats(&c, &Matrix::identity(3)).is_err());
    }

    #[test]
    fn histogram_edges() {
        assert_eq!(hist_bin(-1.0), 0);
        assert_eq!(hist_bin(1.0), HIST_BINS - 1);
        assert_eq!(hist_bin(1.0 + 1e-13), HIST_BINS - 1);
        assert_eq!(hist_bin(0.0), HIST_BINS / 2);
    }

    #[test]
    fn rank_one_spectrum() {
        let r = reps(&[vec![1.0, 2.0], vec![-2.0, -4.0], vec![0.5, 1.0]]);
        let s = spectrum_report(&r, Centering::Uncentered).unwrap();
        assert!(s.values[0] > 1.0);
        assert!(s.values[1].abs() < 1e-10);
    }
}
