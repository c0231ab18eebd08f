use std::path::PathBuf;

use rayon::prelude::*;

use super::config::{DatasetSpec, RunConfig};
use super::report::{fmt_f, median, write_file, Table};
use super::svg::{self, Axes, Scale, Series};
use crate::dynamics::{
    block_diagonal_omega, pullback_metric, rep_change_cov, rep_jacobian_analytic, rep_jacobian_fd,
    DEFAULT_FD_STEP,
};
use crate::error::{Error, Result};
use crate::geometry::{
    canonical_cosine, cosine_matrix, delta_cos_stats, spectrum_report, whiten, Centering, GeometryReport,
    RepresentationSet, HIST_BINS,
};
use crate::linalg::{make_gauge, sym_eig, GaugeTransform, Matrix};
use crate::model::{
    apply_gauge, hidden_reps, load_checkpoint, make_blobs, save_checkpoint, train_mlp_with_history,
    verify_invariance, Dataset, InvarianceReport, MlpModel, TrainHistory,
};
use crate::neighbors::{jaccard_at_k, knn_cosine, top1_flip_rate, NeighborLists};
use crate::simindex::{linear_cka, svcca_mean_corr};

/// Largest logit deviation tolerated between a model and its gauged copy.
pub const MAX_LOGIT_DIFF: f64 = 1e-4;

/// Random gauges drawn by the whitening invariance check.
pub const WHITEN_GAUGES: usize = 5;

/// Test-split probes evaluated by the dynamics command.
pub const DYNAMICS_PROBES: usize = 5;

/// Above this parameter count the pullback spectrum comes from the d×d dual `JJᵀ`.
pub const FULL_SPECTRUM_MAX_P: usize = 256;

/// Files written by a command, plus human-readable summary lines.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

/// Trained model with the test-split baseline geometry.
pub struct Context {
    pub cfg: RunConfig,
    pub train: Dataset,
    pub test: Dataset,
    pub model: MlpModel,
    pub history: Option<TrainHistory>,
    base_reps: RepresentationSet,
    base_cos: Matrix,
    base_knn: NeighborLists,
}

pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    match &cfg.dataset {
        DatasetSpec::Blobs { d_in, classes, n, spread } => make_blobs(*d_in, *classes, *n, *spread, cfg.seed),
        DatasetSpec::Csv(path) => Dataset::read_csv(path),
    }
}

impl Context {
    pub fn prepare(cfg: &RunConfig) -> Result<Context> {
        let (train, test) = load_dataset(cfg)?.split(cfg.seed)?;
        if cfg.k >= test.len() {
            return Err(Error::Config(format!(
                "k = {} must be below the test split size {}",
                cfg.k,
                test.len()
            )));
        }
        let (model, history) = match &cfg.model {
            Some(path) => {
                let m = load_checkpoint(path)?;
                if m.input_dim() != train.input_dim() || m.classes() != train.classes() {
                    return Err(Error::Config(format!(
                        "checkpoint {} expects d_in={}, C={}; data has d_in={}, C={}",
                        path.display(),
                        m.input_dim(),
                        m.classes(),
                        train.input_dim(),
                        train.classes()
                    )));
                }
                (m, None)
            }
            None => {
                let (m, h) = train_mlp_with_history(&train, cfg.d_h, cfg.epochs, cfg.lr, cfg.seed)?;
                (m, Some(h))
            }
        };
        let base_reps = hidden_reps(&model, test.inputs())?;
        let base_cos = cosine_matrix(&base_reps)?;
        let base_knn = knn_cosine(&base_cos, cfg.k)?;
        Ok(Context {
            cfg: cfg.clone(),
            train,
            test,
            model,
            history,
            base_reps,
            base_cos,
            base_knn,
        })
    }

    pub fn hidden_dim(&self) -> usize {
        self.model.hidden_dim()
    }

    pub fn reps(&self) -> &RepresentationSet {
        &self.base_reps
    }

    /// Deterministic gauge seed for grid point `ki`, replicate `s`.
    pub fn gauge_seed(&self, ki: usize, s: usize) -> u64 {
        self.cfg
            .seed
            .wrapping_mul(1_000_003)
            .wrapping_add((ki * 10_007 + s) as u64)
    }

    /// Applies `g` to the model and checks that the function is unchanged.
    pub fn gauged_model(&self, g: &GaugeTransform) -> Result<(MlpModel, InvarianceReport)> {
        let gm = apply_gauge(&self.model, g)?;
        let inv = verify_invariance(&self.model, &gm, self.test.inputs())?;
        check_invariance(&inv, g)?;
        Ok((gm, inv))
    }

    pub fn evaluate(&self, kappa: f64, seed: u64) -> Result<(GaugeRow, GeometryReport)> {
        let g = make_gauge(self.hidden_dim(), kappa, self.cfg.kind, seed)?;
        let (gm, inv) = self.gauged_model(&g)?;
        let after = cosine_matrix(&hidden_reps(&gm, self.test.inputs())?)?;
        let geo = delta_cos_stats(&self.base_cos, &after)?;
        let knn = knn_cosine(&after, self.cfg.k)?;
        let row = GaugeRow {
            kappa,
            seed,
            mean_abs_dcos: geo.mean_abs_dcos,
            max_abs_dcos: geo.max_abs_dcos,
            jaccard: jaccard_at_k(&self.base_knn, &knn)?,
            flip: top1_flip_rate(&self.base_knn, &knn)?,
            agreement: inv.prediction_agreement,
            max_logit_diff: inv.max_logit_diff,
        };
        Ok((row, geo))
    }
}

fn check_invariance(inv: &InvarianceReport, g: &GaugeTransform) -> Result<()> {
    if inv.prediction_agreement != 1.0 || !(inv.max_logit_diff <= MAX_LOGIT_DIFF) {
        return Err(Error::InvarianceViolation(format!(
            "{} gauge with kappa {:.3e}: agreement {}, max logit diff {:e}",
            g.kind(),
            g.kappa(),
            inv.prediction_agreement,
            inv.max_logit_diff
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeRow {
    pub kappa: f64,
    pub seed: u64,
    pub mean_abs_dcos: f64,
    pub max_abs_dcos: f64,
    pub jaccard: f64,
    pub flip: f64,
    pub agreement: f64,
    pub max_logit_diff: f64,
}

const ROW_HEADER: &[&str] = &[
    "kappa",
    "seed",
    "kind",
    "mean_abs_dcos",
    "max_abs_dcos",
    "jaccard_at_k",
    "top1_flip",
    "agreement",
    "max_logit_diff",
];

impl GaugeRow {
    fn fields(&self, kind: &str) -> Vec<String> {
        vec![
            fmt_f(self.kappa),
            self.seed.to_string(),
            kind.to_string(),
            fmt_f(self.mean_abs_dcos),
            fmt_f(self.max_abs_dcos),
            fmt_f(self.jaccard),
            fmt_f(self.flip),
            fmt_f(self.agreement),
            fmt_f(self.max_logit_diff),
        ]
    }
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    Ok(cfg.out.clone())
}

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.workers)))
}

/// Runs `f` over `jobs` on the configured pool, keeping job order.
fn run_jobs<J: Sync, T: Send>(cfg: &RunConfig, jobs: &[J], f: impl Fn(&J) -> Result<T> + Sync) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = pool(cfg)?.install(|| jobs.par_iter().map(&f).collect());
    results.into_iter().collect()
}

fn grid(ctx: &Context) -> Vec<(f64, u64)> {
    let cfg = &ctx.cfg;
    cfg.kappas
        .iter()
        .enumerate()
        .flat_map(|(ki, &k)| (0..cfg.seeds).map(move |s| (ki, k, s)))
        .map(|(ki, k, s)| (k, ctx.gauge_seed(ki, s)))
        .collect()
}

pub fn cmd_train(cfg: &RunConfig) -> Result<Outcome> {
    let ctx = Context::prepare(cfg)?;
    let dir = out_dir(cfg)?;
    let mut out = Outcome::default();
    let ckpt = dir.join("model.ckpt");
    save_checkpoint(&ctx.model, &ckpt)?;
    out.files.push(ckpt);

    let mut table = Table::new("train", &["epoch", "loss"]);
    if let Some(h) = &ctx.history {
        table.push(vec!["0".into(), fmt_f(h.initial_loss)]);
        for (e, l) in h.epoch_losses.iter().enumerate() {
            table.push(vec![(e + 1).to_string(), fmt_f(*l)]);
        }
    }
    out.files.push(table.write(&dir, "train.csv")?);
    out.summary.push(format!(
        "train accuracy {:.4}, test accuracy {:.4}",
        ctx.model.accuracy(&ctx.train)?,
        ctx.model.accuracy(&ctx.test)?
    ));
    Ok(out)
}

pub fn cmd_sanity(cfg: &RunConfig) -> Result<Outcome> {
    let ctx = Context::prepare(cfg)?;
    let dir = out_dir(cfg)?;
    let (row, geo) = ctx.evaluate(cfg.sanity_kappa, cfg.seed)?;
    let kind = cfg.kind.to_string();
    let mut out = Outcome::default();

    let mut table = Table::new("sanity", ROW_HEADER);
    table.push(row.fields(&kind));
    out.files.push(table.write(&dir, "sanity.csv")?);

    let mut hist = Table::new("sanity", &["bin_lo", "bin_hi", "count_before", "count_after"]);
    for b in 0..HIST_BINS {
        let lo = -1.0 + 2.0 * b as f64 / HIST_BINS as f64;
        let hi = -1.0 + 2.0 * (b + 1) as f64 / HIST_BINS as f64;
        hist.push(vec![
            fmt_f(lo),
            fmt_f(hi),
            geo.cos_histogram_before[b].to_string(),
            geo.cos_histogram_after[b].to_string(),
        ]);
    }
    out.files.push(hist.write(&dir, "cosine_hist.csv")?);
    let chart = svg::histogram(
        &Axes {
            title: &format!("Pairwise cosine, {kind} gauge, kappa {}", cfg.sanity_kappa),
            x_label: "cosine",
            y_label: "pairs",
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
        },
        -1.0,
        1.0,
        &[("before", &geo.cos_histogram_before), ("after", &geo.cos_histogram_after)],
    );
    out.files.push(write_file(&dir, "cosine_hist.svg", chart.as_bytes())?);
    out.summary.push(format!(
        "kappa {}: mean|dcos| {:.4e}, jaccard@{} {:.4}, flip {:.4}, agreement {}, max logit diff {:.3e}",
        cfg.sanity_kappa, row.mean_abs_dcos, cfg.k, row.jaccard, row.flip, row.agreement, row.max_logit_diff
    ));
    Ok(out)
}

/// Per-κ medians over seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepMedian {
    pub kappa: f64,
    pub mean_abs_dcos: f64,
    pub jaccard: f64,
    pub flip: f64,
    pub min_agreement: f64,
    pub max_logit_diff: f64,
}

pub fn sweep_rows(ctx: &Context) -> Result<Vec<GaugeRow>> {
    run_jobs(&ctx.cfg, &grid(ctx), |&(k, s)| ctx.evaluate(k, s).map(|(row, _)| row))
}

pub fn sweep_medians(kappas: &[f64], rows: &[GaugeRow]) -> Vec<SweepMedian> {
    kappas
        .iter()
        .map(|&kappa| {
            let at: Vec<&GaugeRow> = rows.iter().filter(|r| r.kappa == kappa).collect();
            let col = |f: fn(&GaugeRow) -> f64| median(&mut at.iter().map(|r| f(r)).collect::<Vec<_>>());
            SweepMedian {
                kappa,
                mean_abs_dcos: col(|r| r.mean_abs_dcos),
                jaccard: col(|r| r.jaccard),
                flip: col(|r| r.flip),
                min_agreement: at.iter().map(|r| r.agreement).fold(f64::INFINITY, f64::min),
                max_logit_diff: at.iter().map(|r| r.max_logit_diff).fold(0.0, f64::max),
            }
        })
        .collect()
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let ctx = Context::prepare(cfg)?;
    let dir = out_dir(cfg)?;
    let rows = sweep_rows(&ctx)?;
    let kind = cfg.kind.to_string();
    let mut out = Outcome::default();

    let mut table = Table::new("sweep", ROW_HEADER);
    for r in &rows {
        table.push(r.fields(&kind));
    }
    out.files.push(table.write(&dir, "sweep.csv")?);

    let medians = sweep_medians(&cfg.kappas, &rows);
    let mut mt = Table::new(
        "sweep",
        &["kappa", "median_mean_abs_dcos", "median_jaccard_at_k", "median_top1_flip", "min_agreement", "max_logit_diff"],
    );
    for m in &medians {
        mt.push(vec![
            fmt_f(m.kappa),
            fmt_f(m.mean_abs_dcos),
            fmt_f(m.jaccard),
            fmt_f(m.flip),
            fmt_f(m.min_agreement),
            fmt_f(m.max_logit_diff),
        ]);
        out.summary.push(format!(
            "kappa {:>6}: median mean|dcos| {:.4e}, jaccard@{} {:.4}, flip {:.4}",
            m.kappa, m.mean_abs_dcos, cfg.k, m.jaccard, m.flip
        ));
    }
    out.files.push(mt.write(&dir, "sweep_median.csv")?);

    let series = |name, f: fn(&SweepMedian) -> f64| Series {
        name,
        points: medians.iter().map(|m| (m.kappa, f(m))).collect(),
    };
    let jac_name = format!("Jaccard@{}", cfg.k);
    let chart = svg::line_chart(
        &Axes {
            title: &format!("Gauge strength sweep ({kind}, {} seeds, medians)", cfg.seeds),
            x_label: "condition number kappa (log scale)",
            y_label: "metric",
            x_scale: Scale::Log10,
            y_scale: Scale::Linear,
        },
        &[
            series("mean |dcos|", |m| m.mean_abs_dcos),
            series(&jac_name, |m| m.jaccard),
            series("top-1 flip", |m| m.flip),
        ],
    );
    out.files.push(write_file(&dir, "sweep.svg", chart.as_bytes())?);
    Ok(out)
}

pub fn cmd_whiten(cfg: &RunConfig) -> Result<Outcome> {
    let ctx = Context::prepare(cfg)?;
    let dir = out_dir(cfg)?;
    let h = ctx.reps();
    let before = spectrum_report(h, Centering::Centered)?;
    let (w, wg) = whiten(h, None)?;
    let (_, inv) = ctx.gauged_model(&wg)?;
    let after = spectrum_report(&w, Centering::Centered)?;
    let dev: Vec<f64> = after.values.iter().map(|l| (l - 1.0).abs()).collect();
    let mean_dev = dev.iter().sum::<f64>() / dev.len() as f64;
    let max_dev = dev.iter().copied().fold(0.0, f64::max);

    let reference = canonical_cosine(h)?;
    // grid index past the κ list keeps these seeds apart from the sweep's
    let seeds: Vec<u64> = (0..WHITEN_GAUGES).map(|s| ctx.gauge_seed(cfg.kappas.len(), s)).collect();
    let residuals = run_jobs(cfg, &seeds, |&s| {
        let g = make_gauge(ctx.hidden_dim(), cfg.sanity_kappa, cfg.kind, s)?;
        Ok(canonical_cosine(&h.gauged(&g)?)?.max_abs_diff(&reference))
    })?;
    let residual = residuals.iter().copied().fold(0.0, f64::max);

    let mut out = Outcome::default();
    let mut spec = Table::new("whiten", &["index", "eig_before", "eig_after"]);
    for (i, (b, a)) in before.values.iter().zip(&after.values).enumerate() {
        spec.push(vec![i.to_string(), fmt_f(*b), fmt_f(*a)]);
    }
    out.files.push(spec.write(&dir, "spectrum.csv")?);

    let mut summary = Table::new(
        "whiten",
        &[
            "mean_abs_eig_minus_1",
            "max_abs_eig_minus_1",
            "canonical_cosine_residual",
            "gauges",
            "gauge_kappa",
            "agreement",
            "max_logit_diff",
        ],
    );
    summary.push(vec![
        fmt_f(mean_dev),
        fmt_f(max_dev),
        fmt_f(residual),
        WHITEN_GAUGES.to_string(),
        fmt_f(cfg.sanity_kappa),
        fmt_f(inv.prediction_agreement),
        fmt_f(inv.max_logit_diff),
    ]);
    out.files.push(summary.write(&dir, "whiten_summary.csv")?);

    let idx = |v: &[f64]| -> Vec<(f64, f64)> { v.iter().enumerate().map(|(i, &l)| ((i + 1) as f64, l)).collect() };
    let chart = svg::line_chart(
        &Axes {
            title: "Covariance spectrum before and after whitening",
            x_label: "eigenvalue index",
            y_label: "eigenvalue (log scale)",
            x_scale: Scale::Linear,
            y_scale: Scale::Log10,
        },
        &[
            Series { name: "before", points: idx(&before.values) },
            Series { name: "after", points: idx(&after.values) },
        ],
    );
    out.files.push(write_file(&dir, "spectrum.svg", chart.as_bytes())?);
    out.summary.push(format!(
        "post-whitening mean|lambda-1| {mean_dev:.3e} (max {max_dev:.3e}); canonical cosine residual {residual:.3e}"
    ));
    Ok(out)
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<Outcome> {
    let ctx = Context::prepare(cfg)?;
    let dir = out_dir(cfg)?;
    let rows = run_jobs(cfg, &grid(&ctx), |&(kappa, seed)| {
        let g = make_gauge(ctx.hidden_dim(), kappa, cfg.kind, seed)?;
        let (gm, _) = ctx.gauged_model(&g)?;
        let moved = hidden_reps(&gm, ctx.test.inputs())?;
        let dcos = delta_cos_stats(&ctx.base_cos, &cosine_matrix(&moved)?)?.mean_abs_dcos;
        let cka = linear_cka(&moved, ctx.reps())?;
        let cca = svcca_mean_corr(&moved, ctx.reps(), cfg.energy)?;
        let (ra, rb) = cca.retained_dims.unwrap_or((0, 0));
        Ok(vec![
            fmt_f(kappa),
            seed.to_string(),
            cfg.kind.to_string(),
            fmt_f(dcos),
            fmt_f(cka.value),
            fmt_f(cca.value),
            ra.to_string(),
            rb.to_string(),
        ])
    })?;
    let mut table = Table::new(
        "compare",
        &["kappa", "seed", "kind", "mean_abs_dcos", "linear_cka", "svcca", "svcca_dims_gauged", "svcca_dims_base"],
    );
    for r in rows {
        table.push(r);
    }
    Ok(Outcome {
        files: vec![table.write(&dir, "simindex.csv")?],
        summary: vec![format!(
            "{} (kappa, seed) pairs, svcca energy {}",
            cfg.kappas.len() * cfg.seeds,
            cfg.energy
        )],
    })
}

/// Per-probe dynamics diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsRow {
    pub probe: usize,
    pub fd_rel_error: f64,
    pub g_min_eig: f64,
    pub g_max_eig: f64,
    pub full_spectrum: bool,
    pub gauge_law_residual: f64,
    pub metric_law_residual: f64,
    pub cov_top: Vec<f64>,
}

pub fn dynamics_rows(ctx: &Context) -> Result<Vec<DynamicsRow>> {
    let cfg = &ctx.cfg;
    let g = make_gauge(ctx.hidden_dim(), cfg.sanity_kappa, cfg.kind, cfg.seed)?;
    let (gm, _) = ctx.gauged_model(&g)?;
    let omega = block_diagonal_omega(&ctx.model, cfg.omega)?;
    let metric = g.matrix().transpose().gram_rows();
    let probes: Vec<usize> = (0..DYNAMICS_PROBES.min(ctx.test.len())).collect();
    run_jobs(cfg, &probes, |&i| {
        let x = ctx.test.inputs().column(i);
        let j = rep_jacobian_analytic(&ctx.model, &x)?;
        let fd = rep_jacobian_fd(&ctx.model, &x, DEFAULT_FD_STEP)?;
        let pull = pullback_metric(&j);
        let p = j.j.cols();
        let full_spectrum = p <= FULL_SPECTRUM_MAX_P;
        let (g_min_eig, g_max_eig) = if full_spectrum {
            let s = pull.spectrum()?;
            (s.min(), s.max())
        } else {
            // nonzero spectrum of JᵀJ equals that of JJᵀ; the rest is exactly zero
            let s = sym_eig(&j.j.gram_rows())?;
            let min = if p > j.j.rows() { s.min().min(0.0) } else { s.min() };
            (min, s.max())
        };
        let jg = rep_jacobian_analytic(&gm, &x)?;
        let gauge_law_residual = jg.j.max_abs_diff(&(g.matrix() * &j.j));
        let expected = j.j.t_matmul(&(&metric * &j.j));
        let metric_law_residual = pullback_metric(&jg).g.max_abs_diff(&expected);
        let cov = sym_eig(&rep_change_cov(&j, &omega)?)?;
        Ok(DynamicsRow {
            probe: i,
            fd_rel_error: fd.relative_error(&j),
            g_min_eig,
            g_max_eig,
            full_spectrum,
            gauge_law_residual,
            metric_law_residual,
            cov_top: cov.values.iter().take(5).copied().collect(),
        })
    })
}

pub fn cmd_dynamics(cfg: &RunConfig) -> Result<Outcome> {
    let ctx = Context::prepare(cfg)?;
    let dir = out_dir(cfg)?;
    let rows = dynamics_rows(&ctx)?;
    let n_cov = ctx.hidden_dim().min(5);
    let mut header: Vec<String> = [
        "probe",
        "fd_rel_error",
        "g_min_eig",
        "g_max_eig",
        "g_spectrum",
        "gauge_law_residual",
        "metric_law_residual",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=n_cov).map(|i| format!("cov_eig_{i}")));
    let mut table = Table::with_header("dynamics", header);
    let mut worst_fd = 0.0f64;
    for r in &rows {
        worst_fd = worst_fd.max(r.fd_rel_error);
        let mut fields = vec![
            r.probe.to_string(),
            fmt_f(r.fd_rel_error),
            fmt_f(r.g_min_eig),
            fmt_f(r.g_max_eig),
            if r.full_spectrum { "full" } else { "dual" }.to_string(),
            fmt_f(r.gauge_law_residual),
            fmt_f(r.metric_law_residual),
        ];
        fields.extend(r.cov_top.iter().map(|v| fmt_f(*v)));
        table.push(fields);
    }
    Ok(Outcome {
        files: vec![table.write(&dir, "dynamics.csv")?],
        summary: vec![format!("{} probes, worst analytic-vs-FD relative error {worst_fd:.3e}", rows.len())],
    })
}
