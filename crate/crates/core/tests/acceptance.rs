//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::path::Path;
use std::time::Instant;

use gaugelens::cli::{self, Command, Context, RunConfig};
use gaugelens::dynamics::{pullback_metric, rep_jacobian_analytic, rep_jacobian_fd, DEFAULT_FD_STEP};
use gaugelens::geometry::{canonical_cosine, metric_cosine, spectrum_report, whiten, Centering, MetricTensor};
use gaugelens::linalg::{
    cond, gaussian_matrix, make_gauge, random_orthogonal, seeded_rng, svd, sym_eig, GaugeKind, Matrix,
};
use gaugelens::model::{apply_gauge, make_blobs, train_mlp, verify_invariance};
use gaugelens::simindex::{linear_cka, svcca_mean_corr};
use rand::Rng;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Check {
    Check { pass, detail }
}

fn default_context() -> Context {
    Context::prepare(&RunConfig::default()).expect("default experiment prepares")
}

/// Timed from scratch, including data generation and training.
fn c1_function_preservation() -> Check {
    let start = Instant::now();
    let ctx = default_context();
    let kinds = [GaugeKind::General, GaugeKind::Diagonal, GaugeKind::Orthogonal, GaugeKind::General];
    let mut worst_diff = 0.0f64;
    let mut min_agree = 1.0f64;
    for i in 0..20 {
        let kappa = 1.0 + 49.0 * i as f64 / 19.0;
        let g = make_gauge(64, kappa, kinds[i % kinds.len()], 100 + i as u64).unwrap();
        let gm = apply_gauge(&ctx.model, &g).unwrap();
        let rep = verify_invariance(&ctx.model, &gm, ctx.test.inputs()).unwrap();
        worst_diff = worst_diff.max(rep.max_logit_diff);
        min_agree = min_agree.min(rep.prediction_agreement);
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        min_agree == 1.0 && worst_diff <= 1e-4 && secs < 30.0,
        format!("20 gauges, kappa 1..50: min agreement {min_agree}, max logit diff {worst_diff:.2e}, {secs:.1}s"),
    )
}

fn c2_orthogonal_null(ctx: &Context) -> Check {
    let mut worst = 0.0f64;
    let mut jac = 1.0f64;
    let mut flip = 0.0f64;
    for s in 0..5 {
        let (row, _) = ctx.evaluate(1.0, 200 + s).unwrap();
        worst = worst.max(row.mean_abs_dcos);
        jac = jac.min(row.jaccard);
        flip = flip.max(row.flip);
    }
    check(
        worst <= 1e-10 && jac == 1.0 && flip == 0.0,
        format!("kappa=1, 5 seeds: max mean|dcos| {worst:.2e}, min Jaccard@10 {jac}, max flip {flip}"),
    )
}

fn c3_distortion_growth(ctx: &Context) -> Check {
    let rows = cli::sweep_rows(ctx).unwrap();
    let med = cli::sweep_medians(&ctx.cfg.kappas, &rows);
    let increasing = med.windows(2).all(|w| w[1].mean_abs_dcos > w[0].mean_abs_dcos);
    let at20 = med.iter().find(|m| m.kappa == 20.0).unwrap();
    let agree = rows.iter().all(|r| r.agreement == 1.0);
    let curve: Vec<String> = med.iter().map(|m| format!("{:.3}", m.mean_abs_dcos)).collect();
    check(
        increasing && at20.jaccard < 0.95 && agree,
        format!(
            "median mean|dcos| over kappa grid [{}], Jaccard@10 at kappa=20 {:.3} (flip {:.3}), all agreement 1: {agree}",
            curve.join(", "),
            at20.jaccard,
            at20.flip
        ),
    )
}

fn c4_metric_pullback() -> Check {
    let mut rng = seeded_rng(4);
    let mut worst = 0.0f64;
    for t in 0..1000u64 {
        let d = rng.random_range(2..=16);
        let kappa = 10f64.powf(rng.random_range(0.0..2.0));
        let g = make_gauge(d, kappa, GaugeKind::General, 4000 + t).unwrap();
        let u = gaussian_matrix(d, 1, &mut rng).into_vec();
        let v = gaussian_matrix(d, 1, &mut rng).into_vec();
        let du = g.matrix().mul_vec(&u);
        let dv = g.matrix().mul_vec(&v);
        let direct = metric_cosine(&du, &dv, &MetricTensor::new(Matrix::identity(d)).unwrap()).unwrap();
        let pulled = metric_cosine(&u, &v, &MetricTensor::pullback(g.matrix())).unwrap();
        worst = worst.max((direct - pulled).abs());
    }
    check(worst <= 1e-10, format!("1000 (u, v, D) triples: max deviation {worst:.2e}"))
}

fn c5_whitening(ctx: &Context) -> Check {
    let h = ctx.reps();
    let (w, _) = whiten(h, None).unwrap();
    let eig = spectrum_report(&w, Centering::Centered).unwrap().values;
    let mean_dev = eig.iter().map(|l| (l - 1.0).abs()).sum::<f64>() / eig.len() as f64;
    let reference = canonical_cosine(h).unwrap();
    let mut worst = 0.0f64;
    for i in 0..10 {
        let kappa = 10f64.powf(2.0 * i as f64 / 9.0);
        let g = make_gauge(h.dim(), kappa, GaugeKind::General, 500 + i).unwrap();
        let cc = canonical_cosine(&h.gauged(&g).unwrap()).unwrap();
        worst = worst.max(cc.max_abs_diff(&reference));
    }
    check(
        mean_dev <= 1e-5 && worst <= 1e-6,
        format!("post-whitening mean|lambda-1| {mean_dev:.2e}; canonical cosine residual over 10 gauges (kappa<=100) {worst:.2e}"),
    )
}

fn c6_invariant_indices(ctx: &Context) -> Check {
    let h = ctx.reps();
    let mut svcca_min = 1.0f64;
    for i in 0..10 {
        let kappa = 10f64.powf(2.0 * i as f64 / 9.0);
        let g = make_gauge(h.dim(), kappa, GaugeKind::General, 600 + i).unwrap();
        let s = svcca_mean_corr(&h.gauged(&g).unwrap(), h, 1.0).unwrap();
        svcca_min = svcca_min.min(s.value);
    }
    let mut cka_min = 1.0f64;
    for i in 0..10 {
        let q = random_orthogonal(h.dim(), 700 + i).unwrap();
        let qh = h.transformed(&q).unwrap();
        cka_min = cka_min.min(linear_cka(&qh, h).unwrap().value);
    }
    let scaled = h.transformed(&Matrix::identity(h.dim()).scale(3.7)).unwrap();
    cka_min = cka_min.min(linear_cka(&scaled, h).unwrap().value);
    check(
        svcca_min >= 1.0 - 1e-6 && cka_min >= 1.0 - 1e-8,
        format!("min SVCCA(DH, H) over kappa<=100: {svcca_min:.10}; min CKA(QH, H) and CKA(3.7H, H): {cka_min:.12}"),
    )
}

fn c7_dynamics(ctx: &Context) -> Check {
    // small model so the full p×p pullback spectrum is computed directly
    let data = make_blobs(4, 3, 150, 3.0, 7).unwrap();
    let small = train_mlp(&data, 6, 20, 0.1, 7).unwrap();
    let g = make_gauge(6, 20.0, GaugeKind::General, 8).unwrap();
    let gm = apply_gauge(&small, &g).unwrap();
    let dtd = g.matrix().transpose().gram_rows();
    let mut fd_err = 0.0f64;
    let mut psd_margin = f64::INFINITY;
    let mut law = 0.0f64;
    for i in 0..10 {
        let x = data.inputs().column(i);
        let j = rep_jacobian_analytic(&small, &x).unwrap();
        fd_err = fd_err.max(rep_jacobian_fd(&small, &x, DEFAULT_FD_STEP).unwrap().relative_error(&j));
        let pull = pullback_metric(&j);
        let spec = pull.spectrum().unwrap();
        psd_margin = psd_margin.min(spec.min() + 1e-10 * spec.max().abs());
        let jg = rep_jacobian_analytic(&gm, &x).unwrap();
        law = law.max(jg.j.max_abs_diff(&(g.matrix() * &j.j)));
        law = law.max(pullback_metric(&jg).g.max_abs_diff(&j.j.t_matmul(&(&dtd * &j.j))));
    }
    // and the full-size experiment model
    let rows = cli::dynamics_rows(ctx).unwrap();
    for r in &rows {
        fd_err = fd_err.max(r.fd_rel_error);
        psd_margin = psd_margin.min(r.g_min_eig + 1e-10 * r.g_max_eig);
        law = law.max(r.gauge_law_residual).max(r.metric_law_residual);
    }
    check(
        fd_err <= 1e-5 && psd_margin >= 0.0 && law <= 1e-9,
        format!("max FD relative error {fd_err:.2e}; PSD margin {psd_margin:.2e} >= 0; max gauge-law residual {law:.2e}"),
    )
}

fn run_all(cfg: &RunConfig) -> Vec<(String, Vec<u8>)> {
    let commands = [
        Command::Train,
        Command::Sanity,
        Command::Sweep,
        Command::Whiten,
        Command::Compare,
        Command::Dynamics,
    ];
    let mut files = Vec::new();
    for c in commands {
        let outcome = cli::execute(c, cfg).unwrap();
        for f in outcome.files.iter().filter(|f| f.extension().is_some_and(|e| e == "csv")) {
            files.push((name(f), std::fs::read(f).unwrap()));
        }
    }
    files
}

fn name(p: &Path) -> String {
    p.file_name().unwrap().to_string_lossy().into_owned()
}

fn c8_determinism() -> Check {
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let runs: Vec<Vec<(String, Vec<u8>)>> = dirs
        .iter()
        .zip([1usize, 4, 4])
        .map(|(dir, workers)| {
            let cfg = RunConfig {
                out: dir.path().to_path_buf(),
                workers,
                ..RunConfig::default()
            };
            run_all(&cfg)
        })
        .collect();
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    check(
        identical && !runs[0].is_empty(),
        format!("{} CSV files from all six commands, byte-identical across workers 1, 4, 4: {identical}", runs[0].len()),
    )
}

fn c9_linalg() -> Check {
    let mut rng = seeded_rng(9);
    let mut worst = 0.0f64;
    for &d in &[1usize, 2, 3, 8, 17, 32, 64, 128] {
        let a = gaussian_matrix(d, d, &mut rng);
        let sym = Matrix::from_fn(d, d, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
        let s = sym_eig(&sym).unwrap();
        let r = s.reconstruct_with(|l| l).max_abs_diff(&sym) / (1.0 + sym.norm_inf());
        worst = worst.max(r);
        for &(m, n) in &[(d, d), (d, (d / 2).max(1)), ((d / 2).max(1), d)] {
            let b = gaussian_matrix(m, n, &mut rng);
            let f = svd(&b).unwrap();
            worst = worst.max(f.reconstruct().max_abs_diff(&b) / (1.0 + b.norm_inf()));
        }
    }
    let mut cond_err = 0.0f64;
    for &d in &[2usize, 8, 64, 128] {
        for &kappa in &[1.0, 2.0, 10.0, 100.0, 1000.0] {
            let g = make_gauge(d, kappa, GaugeKind::General, d as u64).unwrap();
            cond_err = cond_err.max((cond(g.matrix()).unwrap() - kappa).abs() / kappa);
        }
    }
    check(
        worst <= 1e-8 && cond_err <= 1e-6,
        format!("max scaled reconstruction residual (d<=128) {worst:.2e}; max relative cond error {cond_err:.2e}"),
    )
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn main() {
    let ctx = default_context();
    let checks: Vec<Criterion> = vec![
        ("function preservation", Box::new(c1_function_preservation)),
        ("orthogonal null case", Box::new(|| c2_orthogonal_null(&ctx))),
        ("distortion growth", Box::new(|| c3_distortion_growth(&ctx))),
        ("metric pullback identity", Box::new(c4_metric_pullback)),
        ("whitening canonical gauge", Box::new(|| c5_whitening(&ctx))),
        ("invariant indices", Box::new(|| c6_invariant_indices(&ctx))),
        ("dynamics checks", Box::new(|| c7_dynamics(&ctx))),
        ("determinism", Box::new(c8_determinism)),
        ("linear-algebra oracles", Box::new(c9_linalg)),
    ];
    let mut failed = 0;
    for (i, (title, f)) in checks.iter().enumerate() {
        let c = f();
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {}. {title}: {}", i + 1, c.detail);
        if !c.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
