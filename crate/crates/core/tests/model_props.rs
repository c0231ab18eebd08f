use std::sync::OnceLock;

use gaugelens::linalg::{make_gauge, GaugeKind, Matrix};
use gaugelens::model::{
    apply_gauge, hidden_reps, make_blobs, read_checkpoint, train_mlp, verify_invariance, write_checkpoint, Dataset,
    MlpModel,
};
use proptest::prelude::*;

struct Trained {
    test: Dataset,
    model: MlpModel,
}

/// A blobs-trained model shared by the property cases.
fn trained() -> &'static Trained {
    static CELL: OnceLock<Trained> = OnceLock::new();
    CELL.get_or_init(|| {
        let data = make_blobs(16, 4, 400, 5.0, 0).unwrap();
        let (train, test) = data.split(0).unwrap();
        let model = train_mlp(&train, 32, 50, 0.1, 0).unwrap();
        Trained { test, model }
    })
}

#[test]
fn training_reaches_high_accuracy() {
    let t = trained();
    let acc = t.model.accuracy(&t.test).unwrap();
    assert!(acc >= 0.9, "test accuracy {acc}");
}

#[test]
fn training_is_reproducible() {
    let data = make_blobs(4, 3, 90, 3.0, 5).unwrap();
    let a = train_mlp(&data, 8, 5, 0.1, 11).unwrap();
    let b = train_mlp(&data, 8, 5, 0.1, 11).unwrap();
    assert_eq!(a.params(), b.params());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauge_preserves_function(log_kappa in 0.0f64..2.0, seed in any::<u64>(), k in 0usize..3) {
        let t = trained();
        let kind = [GaugeKind::General, GaugeKind::Diagonal, GaugeKind::Orthogonal][k];
        let kappa = if kind == GaugeKind::Orthogonal { 1.0 } else { 10f64.powf(log_kappa) };
        let g = make_gauge(32, kappa, kind, seed).unwrap();
        let gm = apply_gauge(&t.model, &g).unwrap();
        let rep = verify_invariance(&t.model, &gm, t.test.inputs()).unwrap();
        prop_assert_eq!(rep.prediction_agreement, 1.0);
        prop_assert!(rep.max_logit_diff <= 1e-4);
    }

    #[test]
    fn gauges_compose_on_models(s1 in any::<u64>(), s2 in any::<u64>()) {
        let t = trained();
        let g1 = make_gauge(32, 10.0, GaugeKind::General, s1).unwrap();
        let g2 = make_gauge(32, 30.0, GaugeKind::General, s2).unwrap();
        let twice = apply_gauge(&apply_gauge(&t.model, &g1).unwrap(), &g2).unwrap();
        let once = apply_gauge(&t.model, &g1.then(&g2).unwrap()).unwrap();
        let x = t.test.inputs();
        prop_assert!(twice.logits_batch(x).unwrap().max_abs_diff(&once.logits_batch(x).unwrap()) <= 1e-8);
    }

    #[test]
    fn gauged_hidden_reps_are_transformed(seed in any::<u64>()) {
        let t = trained();
        let g = make_gauge(32, 50.0, GaugeKind::General, seed).unwrap();
        let gm = apply_gauge(&t.model, &g).unwrap();
        let x = t.test.inputs();
        let h = hidden_reps(&t.model, x).unwrap();
        let dh = g.matrix() * h.matrix();
        prop_assert!(hidden_reps(&gm, x).unwrap().matrix().max_abs_diff(&dh) <= 1e-10);
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact(
        d_in in 1usize..5, d_h in 1usize..6, classes in 2usize..4, seed in any::<u64>(), gauged in any::<bool>(),
        scale in -200.0f64..200.0,
    ) {
        let base = MlpModel::init(d_in, d_h, classes, seed).unwrap();
        // spread magnitudes widely to exercise the float formatting
        let theta: Vec<f64> = base.params().iter().enumerate()
            .map(|(i, v)| v * 10f64.powf(scale * ((i % 7) as f64 / 7.0)))
            .collect();
        let mut m = base.with_params(&theta).unwrap();
        if gauged && d_h > 1 {
            m = apply_gauge(&m, &make_gauge(d_h, 3.0, GaugeKind::General, seed ^ 1).unwrap()).unwrap();
        }
        let mut buf = Vec::new();
        write_checkpoint(&m, &mut buf).unwrap();
        let back = read_checkpoint(buf.as_slice(), std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(back.params(), m.params());
        prop_assert_eq!(back.gauge(), m.gauge());
    }
}

#[test]
fn gauge_dimension_must_match() {
    let m = MlpModel::init(3, 4, 2, 0).unwrap();
    let g = make_gauge(5, 2.0, GaugeKind::General, 0).unwrap();
    assert!(apply_gauge(&m, &g).is_err());
    assert!(verify_invariance(&m, &MlpModel::init(4, 4, 2, 0).unwrap(), &Matrix::zeros(3, 2)).is_err());
}
