use lgfilter::normalcorr_estimate;
use lgfilter_bench::{dense_all_prefix, fixture};

#[test]
fn dense_baseline_matches_structured_estimates() {
    let (p, xs) = fixture(40);
    let dense = dense_all_prefix(&p, &xs);
    let fast = normalcorr_estimate(&p, &xs).unwrap().estimates;
    for (d, f) in dense.iter().zip(&fast) {
        assert!((d - f).abs() < 1e-12);
    }
}
