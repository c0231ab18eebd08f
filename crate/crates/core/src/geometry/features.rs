use crate::error::{Error, Result};
use crate::geometry::{MetricTensor, ZERO_NORM};
use crate::linalg::{norm, Matrix};

/// Feature directions `F` (d×k, one direction per column) and, optionally,
/// the activations `a(x)` (k×n) that combine them into representations `F a`.
#[derive(Debug, Clone)]
pub struct FeatureBasis {
    f: Matrix,
    activations: Option<Matrix>,
}

impl FeatureBasis {
    pub fn new(f: Matrix, activations: Option<Matrix>) -> Result<Self> {
        for j in 0..f.cols() {
            if norm(&f.column(j)) < ZERO_NORM {
                return Err(Error::DegenerateVector { column: j });
            }
        }
        if let Some(a) = &activations {
            if a.rows() != f.cols() {
                return Err(Error::shape(format!(
                    "{} activation rows for {} features",
                    a.rows(),
                    f.cols()
                )));
            }
        }
        Ok(FeatureBasis { f, activations })
    }

    pub fn directions(&self) -> &Matrix {
        &self.f
    }

    pub fn activations(&self) -> Option<&Matrix> {
        self.activations.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.f.rows()
    }

    pub fn count(&self) -> usize {
        self.f.cols()
    }

    /// Features after the gauge `h ↦ D h`: `F ↦ D F`, activations unchanged.
    pub fn transformed(&self, d: &Matrix) -> Result<FeatureBasis> {
        FeatureBasis::new(d.try_matmul(&self.f)?, self.activations.clone())
    }

    /// Representations `H = F A` built from the stored activations.
    pub fn compose(&self) -> Option<Matrix> {
        self.activations.as_ref().map(|a| &self.f * a)
    }

    /// Per-feature readout `Fᵀ h`; exact recovery of `a` when `F` has
    /// orthonormal columns.
    pub fn readout(&self, h: &[f64]) -> Result<Vec<f64>> {
        if h.len() != self.dim() {
            return Err(Error::shape("readout vector length"));
        }
        Ok(self.f.transpose().mul_vec(h))
    }
}

/// `FᵀF`, or `FᵀGF` under a metric `G`.
pub fn feature_gram(basis: &FeatureBasis, metric: Option<&MetricTensor>) -> Result<Matrix> {
    let f = basis.directions();
    match metric {
        None => Ok(f.t_matmul(f)),
        Some(g) => {
            if g.dim() != f.rows() {
                return Err(Error::shape(format!(
                    "{}-dim metric for {}-dim features",
                    g.dim(),
                    f.rows()
                )));
            }
            Ok(f.t_matmul(&(g.matrix() * f)))
        }
    }
}

/// Mean `|cos|` between distinct feature directions; 0 iff the directions
/// are mutually orthogonal. A single feature has no interference.
pub fn interference(basis: &FeatureBasis) -> f64 {
    let gram = feature_gram(basis, None).expect("unmetered gram has no shape constraint");
    let k = basis.count();
    if k < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            sum += (gram[(i, j)] / (gram[(i, i)] * gram[(j, j)]).sqrt()).abs();
        }
    }
    sum / (k * (k - 1) / 2) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{make_gauge, random_orthogonal, GaugeKind};

    fn basis(cols: &[Vec<f64>]) -> FeatureBasis {
        FeatureBasis::new(Matrix::from_columns(cols).unwrap(), None).unwrap()
    }

    #[test]
    fn orthonormal_features() {
        let q = random_orthogonal(4, 1).unwrap();
        let b = FeatureBasis::new(q, None).unwrap();
        assert!(feature_gram(&b, None).unwrap().max_abs_diff(&Matrix::identity(4)) < 1e-12);
        assert!(interference(&b) < 1e-12);
    }

    #[test]
    fn hand_gram() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let b = basis(&[vec![1.0, 0.0], vec![h, h]]);
        let g = feature_gram(&b, None).unwrap();
        assert!((g[(0, 1)] - h).abs() < 1e-15);
    }

    #[test]
    fn identical_columns_interfere_fully() {
        let b = basis(&[vec![1.0, 2.0], vec![1.0, 2.0]]);
        assert!((interference(&b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn planar_triplet() {
        let (c60, s60) = (0.5, 3f64.sqrt() / 2.0);
        let b = basis(&[vec![1.0, 0.0], vec![c60, s60], vec![-c60, s60]]);
        assert!((interference(&b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gram_under_pullback_matches_transformed_features() {
        let b = basis(&[vec![1.0, 0.0, 2.0], vec![0.5, -1.0, 0.0]]);
        let d = make_gauge(3, 9.0, GaugeKind::General, 4).unwrap();
        let via_metric = feature_gram(&b, Some(&MetricTensor::pullback(d.matrix()))).unwrap();
        let via_features = feature_gram(&b.transformed(d.matrix()).unwrap(), None).unwrap();
        assert!(via_metric.max_abs_diff(&via_features) < 1e-10);
    }

    #[test]
    fn zero_feature_rejected() {
        let f = Matrix::from_columns(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            FeatureBasis::new(f, None),
            Err(Error::DegenerateVector { column: 1 })
        ));
    }

    #[test]
    fn orthonormal_readout_is_exact() {
        let q = random_orthogonal(5, 9).unwrap();
        let f = q.columns(&[0, 2, 3]);
        let a = Matrix::from_columns(&[vec![0.0, 1.5, 0.0], vec![-2.0, 0.0, 0.25]]).unwrap();
        let b = FeatureBasis::new(f, Some(a.clone())).unwrap();
        let h = b.compose().unwrap();
        for s in 0..2 {
            let rec = b.readout(&h.column(s)).unwrap();
            for (x, y) in rec.iter().zip(a.column(s)) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }
}
