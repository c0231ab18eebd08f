use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::RepresentationSet;
use crate::linalg::{dot, seeded_rng, GaugeTransform, Matrix};
use crate::model::Dataset;

/// Mini-batch size used by [`train_mlp`].
pub const BATCH_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
}

/// Two-layer perceptron `logits = W2 · D · tanh(W1 x + b1) + b2`.
///
/// `D` is an optional gauge on the post-activation hidden vector; it is not a
/// trainable parameter. The flattened parameter vector `θ` is
/// `(W1, b1, W2, b2)` with matrices in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    w1: Matrix,
    b1: Vec<f64>,
    w2: Matrix,
    b2: Vec<f64>,
    gauge: Option<Matrix>,
    activation: Activation,
}

impl MlpModel {
    pub fn from_parts(
        w1: Matrix,
        b1: Vec<f64>,
        w2: Matrix,
        b2: Vec<f64>,
        gauge: Option<Matrix>,
    ) -> Result<Self> {
        let d_h = w1.rows();
        if b1.len() != d_h || w2.cols() != d_h || b2.len() != w2.rows() {
            return Err(Error::shape(format!(
                "W1 {:?}, b1 {}, W2 {:?}, b2 {}",
                w1.shape(),
                b1.len(),
                w2.shape(),
                b2.len()
            )));
        }
        if let Some(g) = &gauge {
            if g.shape() != (d_h, d_h) {
                return Err(Error::shape(format!("gauge {:?} for d_h = {d_h}", g.shape())));
            }
        }
        if b1.iter().chain(&b2).any(|v| !v.is_finite()) || !w1.is_finite() || !w2.is_finite() {
            return Err(Error::Degenerate("non-finite parameters".into()));
        }
        Ok(MlpModel {
            w1,
            b1,
            w2,
            b2,
            gauge,
            activation: Activation::Tanh,
        })
    }

    /// Uniform `[−1/√fan_in, 1/√fan_in]` initialization of every block.
    pub fn init(d_in: usize, d_h: usize, classes: usize, seed: u64) -> Result<Self> {
        if d_in == 0 || d_h == 0 || classes == 0 {
            return Err(Error::domain(format!(
                "layer sizes must be positive (d_in={d_in}, d_h={d_h}, C={classes})"
            )));
        }
        let mut rng = seeded_rng(seed);
        let mut uniform = |rows: usize, cols: usize, fan_in: usize| {
            let a = 1.0 / (fan_in as f64).sqrt();
            Matrix::from_fn(rows, cols, |_, _| rng.random_range(-a..=a))
        };
        let w1 = uniform(d_h, d_in, d_in);
        let b1 = uniform(d_h, 1, d_in).into_vec();
        let w2 = uniform(classes, d_h, d_h);
        let b2 = uniform(classes, 1, d_h).into_vec();
        MlpModel::from_parts(w1, b1, w2, b2, None)
    }

    pub fn input_dim(&self) -> usize {
        self.w1.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn classes(&self) -> usize {
        self.w2.rows()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn w1(&self) -> &Matrix {
        &self.w1
    }

    pub fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub fn w2(&self) -> &Matrix {
        &self.w2
    }

    pub fn b2(&self) -> &[f64] {
        &self.b2
    }

    pub fn gauge(&self) -> Option<&Matrix> {
        self.gauge.as_ref()
    }

    pub fn param_count(&self) -> usize {
        let (d_in, d_h, c) = (self.input_dim(), self.hidden_dim(), self.classes());
        d_h * d_in + d_h + c * d_h + c
    }

    /// Flattened `θ = (W1, b1, W2, b2)`.
    pub fn params(&self) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.param_count());
        theta.extend_from_slice(self.w1.as_slice());
        theta.extend_from_slice(&self.b1);
        theta.extend_from_slice(self.w2.as_slice());
        theta.extend_from_slice(&self.b2);
        theta
    }

    /// Same architecture and gauge with parameters replaced by `theta`.
    pub fn with_params(&self, theta: &[f64]) -> Result<MlpModel> {
        if theta.len() != self.param_count() {
            return Err(Error::shape(format!(
                "{} parameters for a model with {}",
                theta.len(),
                self.param_count()
            )));
        }
        let (d_in, d_h, c) = (self.input_dim(), self.hidden_dim(), self.classes());
        let (w1, rest) = theta.split_at(d_h * d_in);
        let (b1, rest) = rest.split_at(d_h);
        let (w2, b2) = rest.split_at(c * d_h);
        MlpModel::from_parts(
            Matrix::new(d_h, d_in, w1.to_vec())?,
            b1.to_vec(),
            Matrix::new(c, d_h, w2.to_vec())?,
            b2.to_vec(),
            self.gauge.clone(),
        )
    }

    fn check_input(&self, len: usize) -> Result<()> {
        if len != self.input_dim() {
            return Err(Error::shape(format!(
                "input of dimension {len} for a model with d_in = {}",
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// `tanh(W1 x + b1)` before any gauge.
    fn activations(&self, x: &[f64]) -> Vec<f64> {
        self.w1
            .mul_vec(x)
            .iter()
            .zip(&self.b1)
            .map(|(z, b)| (z + b).tanh())
            .collect()
    }

    /// Hidden representation of one input, gauge included.
    pub fn hidden(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x.len())?;
        let a = self.activations(x);
        Ok(match &self.gauge {
            Some(g) => g.mul_vec(&a),
            None => a,
        })
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        let h = self.hidden(x)?;
        Ok(self
            .w2
            .mul_vec(&h)
            .iter()
            .zip(&self.b2)
            .map(|(z, b)| z + b)
            .collect())
    }

    /// Hidden matrix `D · tanh(W1 X + b1 1ᵀ)` for a batch of column inputs.
    pub fn hidden_batch(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x.rows())?;
        let z = &self.w1 * x;
        let a = Matrix::from_fn(z.rows(), z.cols(), |i, j| (z[(i, j)] + self.b1[i]).tanh());
        Ok(match &self.gauge {
            Some(g) => g * &a,
            None => a,
        })
    }

    /// Logits for a batch, C×n.
    pub fn logits_batch(&self, x: &Matrix) -> Result<Matrix> {
        let h = self.hidden_batch(x)?;
        let z = &self.w2 * &h;
        Ok(Matrix::from_fn(z.rows(), z.cols(), |i, j| z[(i, j)] + self.b2[i]))
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let z = self.logits_batch(x)?;
        Ok((0..z.cols()).map(|j| argmax(&z.column(j))).collect())
    }

    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        let pred = self.predict(data.inputs())?;
        let hits = pred.iter().zip(data.labels()).filter(|(p, y)| p == y).count();
        Ok(hits as f64 / data.len() as f64)
    }

    /// Mean softmax cross-entropy over the dataset.
    pub fn loss(&self, data: &Dataset) -> Result<f64> {
        let z = self.logits_batch(data.inputs())?;
        let total: f64 = data
            .labels()
            .iter()
            .enumerate()
            .map(|(j, &y)| cross_entropy(&z.column(j), y))
            .sum();
        Ok(total / data.len() as f64)
    }
}

/// First index of the maximum (ties go to the lower class).
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn cross_entropy(z: &[f64], y: usize) -> f64 {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    lse - z[y]
}

/// Hidden representations of the columns of `x`.
pub fn hidden_reps(m: &MlpModel, x: &Matrix) -> Result<RepresentationSet> {
    RepresentationSet::new(m.hidden_batch(x)?, None)
}

/// Inserts the gauge `h ↦ D h` after the activation and compensates the
/// readout with `W2 D⁻¹`. Gauges compose: an existing `D0` becomes `D · D0`.
pub fn apply_gauge(m: &MlpModel, g: &GaugeTransform) -> Result<MlpModel> {
    if g.dim() != m.hidden_dim() {
        return Err(Error::shape(format!(
            "{}-dim gauge for hidden width {}",
            g.dim(),
            m.hidden_dim()
        )));
    }
    let gauge = match &m.gauge {
        Some(d0) => g.matrix() * d0,
        None => g.matrix().clone(),
    };
    Ok(MlpModel {
        w1: m.w1.clone(),
        b1: m.b1.clone(),
        w2: &m.w2 * g.inverse(),
        b2: m.b2.clone(),
        gauge: Some(gauge),
        activation: m.activation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceReport {
    pub max_logit_diff: f64,
    pub prediction_agreement: f64,
}

/// Compares two models' logits and argmax predictions on the columns of `x`.
pub fn verify_invariance(a: &MlpModel, b: &MlpModel, x: &Matrix) -> Result<InvarianceReport> {
    if a.input_dim() != b.input_dim() || a.classes() != b.classes() {
        return Err(Error::shape("models disagree on input or class dimension"));
    }
    let za = a.logits_batch(x)?;
    let zb = b.logits_batch(x)?;
    let n = x.cols();
    let agree = (0..n)
        .filter(|&j| argmax(&za.column(j)) == argmax(&zb.column(j)))
        .count();
    Ok(InvarianceReport {
        max_logit_diff: za.max_abs_diff(&zb),
        prediction_agreement: agree as f64 / n as f64,
    })
}

#[derive(Debug, Clone, Default)]
pub struct TrainHistory {
    /// Full-data loss of the initial parameters.
    pub initial_loss: f64,
    /// Full-data loss after each epoch.
    pub epoch_losses: Vec<f64>,
}

pub fn train_mlp(data: &Dataset, d_h: usize, epochs: usize, lr: f64, seed: u64) -> Result<MlpModel> {
    train_mlp_with_history(data, d_h, epochs, lr, seed).map(|(m, _)| m)
}

/// Softmax cross-entropy by plain mini-batch SGD (batch 32, reshuffled each
/// epoch). Initialization and batch order both derive from `seed`.
pub fn train_mlp_with_history(
    data: &Dataset,
    d_h: usize,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<(MlpModel, TrainHistory)> {
    if epochs == 0 {
        return Err(Error::domain("epochs must be >= 1"));
    }
    if !(lr > 0.0) || !lr.is_finite() {
        return Err(Error::domain(format!("learning rate must be positive, got {lr}")));
    }
    let mut m = MlpModel::init(data.input_dim(), d_h, data.classes(), seed)?;
    let mut rng = seeded_rng(seed ^ 0x5EE_D0FB_A7C4);
    let mut history = TrainHistory {
        initial_loss: m.loss(data)?,
        epoch_losses: Vec::with_capacity(epochs),
    };
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 1..=epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(BATCH_SIZE) {
            sgd_step(&mut m, data, batch, lr);
        }
        let loss = m.loss(data)?;
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        history.epoch_losses.push(loss);
    }
    Ok((m, history))
}

fn sgd_step(m: &mut MlpModel, data: &Dataset, batch: &[usize], lr: f64) {
    let (d_in, d_h, c) = (m.input_dim(), m.hidden_dim(), m.classes());
    let mut gw1 = vec![0.0; d_h * d_in];
    let mut gb1 = vec![0.0; d_h];
    let mut gw2 = vec![0.0; c * d_h];
    let mut gb2 = vec![0.0; c];
    let scale = 1.0 / batch.len() as f64;

    for &j in batch {
        let x = data.inputs().column(j);
        let a = m.activations(&x);
        let z: Vec<f64> = (0..c).map(|k| dot(m.w2.row(k), &a) + m.b2[k]).collect();
        let mut dz = softmax(&z);
        dz[data.labels()[j]] -= 1.0;

        let mut da = vec![0.0; d_h];
        for k in 0..c {
            let g = dz[k] * scale;
            gb2[k] += g;
            for (i, &ai) in a.iter().enumerate() {
                gw2[k * d_h + i] += g * ai;
                da[i] += g * m.w2[(k, i)];
            }
        }
        for i in 0..d_h {
            let dpre = da[i] * (1.0 - a[i] * a[i]);
            gb1[i] += dpre;
            for (b, &xb) in x.iter().enumerate() {
                gw1[i * d_in + b] += dpre * xb;
            }
        }
    }

    let step = |params: &mut [f64], grads: &[f64]| {
        for (p, g) in params.iter_mut().zip(grads) {
            *p -= lr * g;
        }
    };
    let mut w1 = m.w1.clone().into_vec();
    step(&mut w1, &gw1);
    m.w1 = Matrix::from_vec_unchecked(d_h, d_in, w1);
    step(&mut m.b1, &gb1);
    let mut w2 = m.w2.clone().into_vec();
    step(&mut w2, &gw2);
    m.w2 = Matrix::from_vec_unchecked(c, d_h, w2);
    step(&mut m.b2, &gb2);
}
