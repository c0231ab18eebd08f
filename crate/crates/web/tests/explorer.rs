use gaugelens_web::{planar_gauge, planar_metric, Explorer};

#[test]
fn views_are_deterministic() {
    let a = Explorer::build(5).unwrap().view(10.0, "diagonal", 2).unwrap();
    let b = Explorer::build(5).unwrap().view(10.0, "diagonal", 2).unwrap();
    assert_eq!(a.pairs(), b.pairs());
    assert_eq!(a.hist_after(), b.hist_after());
}

#[test]
fn histograms_count_every_pair() {
    let ex = Explorer::build(3).unwrap();
    let v = ex.view(5.0, "general", 1).unwrap();
    let n = ex.test_size() as u32;
    let total = n * (n - 1) / 2;
    assert_eq!(v.hist_before().iter().sum::<u32>(), total);
    assert_eq!(v.hist_after().iter().sum::<u32>(), total);
}

#[test]
fn planar_gauge_has_requested_condition_number() {
    let d = planar_gauge(7.0, 1.1);
    let out = planar_metric(0.2, 2.4, 7.0, 1.1).unwrap();
    let du = d.mul_vec(&[0.2f64.cos(), 0.2f64.sin()]);
    assert_eq!(&out[3..5], du.as_slice());
    assert!((out[7] - 7.0).abs() <= 1e-9);
}
