use spikegof::boundary::BoundarySpec;
use spikegof::exec::Execution;
use spikegof::harness::{coverage_csv, coverage_experiment, joint_csv, joint_rejection_experiment, DEFAULT_SIZES};
use std::time::Instant;

#[test]
fn union_of_three_tests_at_one_percent() {
    let rows = joint_rejection_experiment(&[10, 20, 50, 100, 300, 900], 5000, 0.01, 71, Execution::default()).unwrap();
    let pooled = |small: bool| {
        let sel: Vec<_> = rows.iter().filter(|r| (r.n <= 100) == small).collect();
        let any: usize = sel.iter().map(|r| r.any).sum();
        let total: usize = sel.iter().map(|r| r.replicates).sum();
        1.0 - any as f64 / total as f64
    };
    for r in &rows {
        println!("n = {}: union coverage {:.4}", r.n, 1.0 - r.any as f64 / r.replicates as f64);
    }
    let (small, large) = (pooled(true), pooled(false));
    println!("pooled union coverage: n <= 100 {small:.4}, n > 100 {large:.4}");
    assert!((small - 0.96).abs() <= 0.01, "n <= 100: {small}");
    assert!((large - 0.97).abs() <= 0.01, "n > 100: {large}");
}

#[test]
fn ninety_nine_percent_band_undercovers_at_small_n() {
    let rows = coverage_experiment(&[10, 20, 50], 10_000, &[BoundarySpec::standard_99()], 72, Execution::default()).unwrap();
    for r in &rows {
        println!("n = {}: 99% band coverage {:.4}", r.n, r.empirical);
        assert!((r.empirical - 0.98).abs() < 0.006, "n = {}: {}", r.n, r.empirical);
    }
}

#[test]
fn default_grid_runs_and_serializes() {
    let bands = [BoundarySpec::standard_95(), BoundarySpec::standard_99()];
    let rows = coverage_experiment(&DEFAULT_SIZES, 200, &bands, 73, Execution::default()).unwrap();
    assert_eq!(rows.len(), 2 * DEFAULT_SIZES.len());
    assert_eq!(coverage_csv(&rows).lines().count(), rows.len() + 1);
    let joint = joint_rejection_experiment(&[10, 50], 1000, 0.05, 73, Execution::default()).unwrap();
    assert_eq!(joint_csv(&joint).lines().count(), 3);
}

#[test]
fn runtime_grows_linearly_with_replicates() {
    let bands = [BoundarySpec::standard_95()];
    let time = |reps: usize| {
        let start = Instant::now();
        coverage_experiment(&[500], reps, &bands, 74, Execution::Sequential).unwrap();
        start.elapsed().as_secs_f64()
    };
    time(1000);
    let (t1, t4) = (time(2000), time(8000));
    let ratio = t4 / t1;
    assert!((2.0..8.0).contains(&ratio), "fourfold replicates took {ratio:.2}× as long");
}
