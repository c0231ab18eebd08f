use gaugelens::geometry::RepresentationSet;
use gaugelens::linalg::{gaussian_matrix, make_gauge, seeded_rng, GaugeKind};
use gaugelens::simindex::{linear_cka, svcca_mean_corr, svcca_with_ridge, CCA_RIDGE};
use proptest::prelude::*;

fn reps(d: usize, n: usize, seed: u64) -> RepresentationSet {
    RepresentationSet::new(gaussian_matrix(d, n, &mut seeded_rng(seed)), None).unwrap()
}

#[test]
fn independent_representations_score_low() {
    let mut scores: Vec<f64> = (0..20)
        .map(|s| svcca_mean_corr(&reps(4, 1000, 2 * s), &reps(4, 1000, 2 * s + 1), 1.0).unwrap().value)
        .collect();
    scores.sort_by(f64::total_cmp);
    // 95th percentile of 20 draws
    assert!(scores[18] < 0.3, "p95 = {}", scores[18]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn svcca_full_energy_gauge_invariance(d in 2usize..12, log_kappa in 0.0f64..2.0, seed in any::<u64>()) {
        let h = reps(d, 10 * d + 20, seed);
        let g = make_gauge(d, 10f64.powf(log_kappa), GaugeKind::General, seed ^ 1).unwrap();
        let s = svcca_mean_corr(&h.gauged(&g).unwrap(), &h, 1.0).unwrap();
        prop_assert!(s.value >= 1.0 - 1e-6);
        prop_assert!(s.value <= 1.0 + 1e-9);
    }

    #[test]
    fn svcca_is_stable_to_the_ridge(d in 2usize..10, seed in any::<u64>()) {
        let a = reps(d, 8 * d + 10, seed);
        let b = reps(d, 8 * d + 10, seed ^ 2);
        let base = svcca_with_ridge(&a, &b, 1.0, CCA_RIDGE).unwrap().value;
        for ridge in [CCA_RIDGE / 10.0, CCA_RIDGE * 10.0] {
            prop_assert!((svcca_with_ridge(&a, &b, 1.0, ridge).unwrap().value - base).abs() <= 1e-6);
        }
    }

    #[test]
    fn cka_is_symmetric_and_bounded_under_any_gauge(d in 2usize..10, log_kappa in 0.0f64..2.0, seed in any::<u64>()) {
        let h = reps(d, 40, seed);
        let g = make_gauge(d, 10f64.powf(log_kappa), GaugeKind::General, seed ^ 3).unwrap();
        let dh = h.gauged(&g).unwrap();
        let ab = linear_cka(&dh, &h).unwrap().value;
        let ba = linear_cka(&h, &dh).unwrap().value;
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&ab));
    }
}
