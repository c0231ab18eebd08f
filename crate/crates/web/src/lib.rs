//! Browser bindings: a gauge distortion explorer over a small trained MLP,
//! a two-dimensional metric-cosine demo and a whitening spectrum view.
//!
//! The numeric work lives in plain functions so it can be tested natively;
//! the `#[wasm_bindgen]` items only convert errors and pack results.

use gaugelens::geometry::{
    canonical_cosine, cosine_matrix, delta_cos_stats, metric_cosine, spectrum_report, whiten, Centering,
    MetricTensor, RepresentationSet,
};
use gaugelens::linalg::{cond, make_gauge, GaugeKind, Matrix};
use gaugelens::model::{apply_gauge, hidden_reps, make_blobs, train_mlp, verify_invariance, Dataset, MlpModel};
use gaugelens::neighbors::{jaccard_at_k, knn_cosine, top1_flip_rate, NeighborLists};
use gaugelens::simindex::{linear_cka, svcca_mean_corr};
use wasm_bindgen::prelude::*;

const D_IN: usize = 8;
const CLASSES: usize = 4;
const SAMPLES: usize = 250;
const SPREAD: f64 = 4.0;
const HIDDEN: usize = 16;
const EPOCHS: usize = 30;
const LR: f64 = 0.1;
const K: usize = 10;
/// Cap on cosine pairs returned for the scatter plot.
const MAX_PAIRS: usize = 3000;

fn js_err(e: gaugelens::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Metrics for one gauge applied to the explorer's model.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct GaugeView {
    kappa: f64,
    mean_abs_dcos: f64,
    max_abs_dcos: f64,
    jaccard: f64,
    flip: f64,
    agreement: f64,
    max_logit_diff: f64,
    cka: f64,
    svcca: f64,
    canonical_residual: f64,
    hist_before: Vec<u32>,
    hist_after: Vec<u32>,
    pairs: Vec<f64>,
}

#[wasm_bindgen]
impl GaugeView {
    #[wasm_bindgen(getter)]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    #[wasm_bindgen(getter, js_name = meanAbsDcos)]
    pub fn mean_abs_dcos(&self) -> f64 {
        self.mean_abs_dcos
    }
    #[wasm_bindgen(getter, js_name = maxAbsDcos)]
    pub fn max_abs_dcos(&self) -> f64 {
        self.max_abs_dcos
    }
    #[wasm_bindgen(getter)]
    pub fn jaccard(&self) -> f64 {
        self.jaccard
    }
    #[wasm_bindgen(getter)]
    pub fn flip(&self) -> f64 {
        self.flip
    }
    #[wasm_bindgen(getter)]
    pub fn agreement(&self) -> f64 {
        self.agreement
    }
    #[wasm_bindgen(getter, js_name = maxLogitDiff)]
    pub fn max_logit_diff(&self) -> f64 {
        self.max_logit_diff
    }
    #[wasm_bindgen(getter)]
    pub fn cka(&self) -> f64 {
        self.cka
    }
    #[wasm_bindgen(getter)]
    pub fn svcca(&self) -> f64 {
        self.svcca
    }
    #[wasm_bindgen(getter, js_name = canonicalResidual)]
    pub fn canonical_residual(&self) -> f64 {
        self.canonical_residual
    }
    #[wasm_bindgen(getter, js_name = histBefore)]
    pub fn hist_before(&self) -> Vec<u32> {
        self.hist_before.clone()
    }
    #[wasm_bindgen(getter, js_name = histAfter)]
    pub fn hist_after(&self) -> Vec<u32> {
        self.hist_after.clone()
    }
    /// Interleaved `(cos before, cos after)` pairs.
    #[wasm_bindgen(getter)]
    pub fn pairs(&self) -> Vec<f64> {
        self.pairs.clone()
    }
}

/// Covariance spectra (descending) before and after whitening.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct SpectrumView {
    before: Vec<f64>,
    after: Vec<f64>,
    mean_abs_dev: f64,
}

#[wasm_bindgen]
impl SpectrumView {
    #[wasm_bindgen(getter)]
    pub fn before(&self) -> Vec<f64> {
        self.before.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn after(&self) -> Vec<f64> {
        self.after.clone()
    }
    #[wasm_bindgen(getter, js_name = meanAbsDev)]
    pub fn mean_abs_dev(&self) -> f64 {
        self.mean_abs_dev
    }
}

/// A blobs-trained model with its test-split baseline geometry.
#[wasm_bindgen]
pub struct Explorer {
    model: MlpModel,
    test: Dataset,
    reps: RepresentationSet,
    cos: Matrix,
    knn: NeighborLists,
    canonical: Matrix,
    accuracy: f64,
}

impl Explorer {
    pub fn build(seed: u64) -> gaugelens::Result<Explorer> {
        let (train, test) = make_blobs(D_IN, CLASSES, SAMPLES, SPREAD, seed)?.split(seed)?;
        let model = train_mlp(&train, HIDDEN, EPOCHS, LR, seed)?;
        let reps = hidden_reps(&model, test.inputs())?;
        let cos = cosine_matrix(&reps)?;
        let knn = knn_cosine(&cos, K)?;
        let canonical = canonical_cosine(&reps)?;
        let accuracy = model.accuracy(&test)?;
        Ok(Explorer { model, test, reps, cos, knn, canonical, accuracy })
    }

    pub fn view(&self, kappa: f64, kind: &str, seed: u64) -> gaugelens::Result<GaugeView> {
        let kind: GaugeKind = kind.parse()?;
        let g = make_gauge(HIDDEN, kappa, kind, seed)?;
        let gm = apply_gauge(&self.model, &g)?;
        let inv = verify_invariance(&self.model, &gm, self.test.inputs())?;
        let moved = hidden_reps(&gm, self.test.inputs())?;
        let after = cosine_matrix(&moved)?;
        let geo = delta_cos_stats(&self.cos, &after)?;
        let knn = knn_cosine(&after, K)?;
        let n = after.rows();
        let stride = (n * (n - 1) / 2).div_ceil(MAX_PAIRS).max(1);
        let pairs = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .step_by(stride)
            .flat_map(|(i, j)| [self.cos[(i, j)], after[(i, j)]])
            .collect();
        Ok(GaugeView {
            kappa: g.kappa(),
            mean_abs_dcos: geo.mean_abs_dcos,
            max_abs_dcos: geo.max_abs_dcos,
            jaccard: jaccard_at_k(&self.knn, &knn)?,
            flip: top1_flip_rate(&self.knn, &knn)?,
            agreement: inv.prediction_agreement,
            max_logit_diff: inv.max_logit_diff,
            cka: linear_cka(&moved, &self.reps)?.value,
            svcca: svcca_mean_corr(&moved, &self.reps, 1.0)?.value,
            canonical_residual: canonical_cosine(&moved)?.max_abs_diff(&self.canonical),
            hist_before: geo.cos_histogram_before.iter().map(|&c| c as u32).collect(),
            hist_after: geo.cos_histogram_after.iter().map(|&c| c as u32).collect(),
            pairs,
        })
    }

    /// Spectrum of the gauged representation's covariance, then of its whitening.
    pub fn spectrum(&self, kappa: f64, seed: u64) -> gaugelens::Result<SpectrumView> {
        let g = make_gauge(HIDDEN, kappa, GaugeKind::General, seed)?;
        let moved = self.reps.gauged(&g)?;
        let before = spectrum_report(&moved, Centering::Centered)?.values;
        let (w, _) = whiten(&moved, None)?;
        let after = spectrum_report(&w, Centering::Centered)?.values;
        let mean_abs_dev = after.iter().map(|l| (l - 1.0).abs()).sum::<f64>() / after.len() as f64;
        Ok(SpectrumView { before, after, mean_abs_dev })
    }
}

#[wasm_bindgen]
impl Explorer {
    /// Generates data and trains the model; takes a moment.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> Result<Explorer, JsError> {
        Explorer::build(seed as u64).map_err(js_err)
    }

    #[wasm_bindgen(getter)]
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    #[wasm_bindgen(getter, js_name = testSize)]
    pub fn test_size(&self) -> usize {
        self.test.len()
    }

    /// Applies a gauge of the given kind (`general`, `diagonal`, `orthogonal`).
    #[wasm_bindgen(js_name = applyGauge)]
    pub fn apply_gauge(&self, kappa: f64, kind: &str, seed: u32) -> Result<GaugeView, JsError> {
        self.view(kappa, kind, seed as u64).map_err(js_err)
    }

    #[wasm_bindgen(js_name = whiteningSpectrum)]
    pub fn whitening_spectrum(&self, kappa: f64, seed: u32) -> Result<SpectrumView, JsError> {
        self.spectrum(kappa, seed as u64).map_err(js_err)
    }
}

/// `D = R(rotation) · diag(1, 1/κ)`: stretches one axis relative to the other.
pub fn planar_gauge(kappa: f64, rotation: f64) -> Matrix {
    let (s, c) = rotation.sin_cos();
    Matrix::from_fn(2, 2, |i, j| {
        let r = [[c, -s], [s, c]][i][j];
        r * if j == 0 { 1.0 } else { 1.0 / kappa }
    })
}

/// Returns `[cos(u, v), cos(Du, Dv), metric_cosine(u, v, DᵀD), Du.x, Du.y, Dv.x, Dv.y, cond(D)]`.
pub fn planar_metric(u_angle: f64, v_angle: f64, kappa: f64, rotation: f64) -> gaugelens::Result<Vec<f64>> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(gaugelens::Error::Domain(format!("kappa must be >= 1, got {kappa}")));
    }
    let u = [u_angle.cos(), u_angle.sin()];
    let v = [v_angle.cos(), v_angle.sin()];
    let d = planar_gauge(kappa, rotation);
    let du = d.mul_vec(&u);
    let dv = d.mul_vec(&v);
    let euclid = MetricTensor::new(Matrix::identity(2))?;
    Ok(vec![
        metric_cosine(&u, &v, &euclid)?,
        metric_cosine(&du, &dv, &euclid)?,
        metric_cosine(&u, &v, &MetricTensor::pullback(&d))?,
        du[0],
        du[1],
        dv[0],
        dv[1],
        cond(&d)?,
    ])
}

#[wasm_bindgen(js_name = planarMetric)]
pub fn planar_metric_js(u_angle: f64, v_angle: f64, kappa: f64, rotation: f64) -> Result<Vec<f64>, JsError> {
    planar_metric(u_angle, v_angle, kappa, rotation).map_err(js_err)
}
