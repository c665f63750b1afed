use spikegof::exec::{map_range, Execution};
use spikegof::fit::{fit_loglogistic, fitted_model_battery, Family, FITTED_CAVEAT};
use spikegof::gof::BatteryConfig;
use spikegof::intensity::{Hazard, InverseGaussianHazard, LogLogisticHazard};
use spikegof::simulate::{sample_intervals, simulate_renewal, RngStream};

fn ig() -> Hazard {
    Hazard::InverseGaussian(InverseGaussianHazard::new(0.075, 3.0).unwrap())
}

fn battery_passes(family: Family, r: u64) -> (bool, bool) {
    let train = simulate_renewal(&ig(), 500, &RngStream::new(61, r)).unwrap();
    let config = BatteryConfig { stream: RngStream::new(62, r), ..BatteryConfig::default() };
    let out = fitted_model_battery(&train, family, &config).unwrap();
    assert!(out.reports.iter().all(|rep| rep.notes.iter().any(|n| n == FITTED_CAVEAT)));
    let all_pass = out.reports.iter().all(|rep| rep.passes_at(0.05) == Some(true));
    let berman_or_wiener = out
        .reports
        .iter()
        .filter(|rep| rep.test_name == "berman" || rep.test_name == "wiener")
        .any(|rep| rep.passes_at(0.05) == Some(false));
    (all_pass, berman_or_wiener)
}

#[test]
fn correct_family_passes_the_battery() {
    let reps = 200;
    let passes = map_range(reps, Execution::default(), |r| battery_passes(Family::InverseGaussian, r as u64).0)
        .into_iter()
        .filter(|&p| p)
        .count();
    println!("IG fitted to IG trains: all five pass in {passes} of {reps}");
    assert!(passes as f64 >= 0.85 * reps as f64);
}

#[test]
fn wrong_family_is_rejected() {
    let reps = 100;
    let rejected = map_range(reps, Execution::default(), |r| battery_passes(Family::Exponential, 1000 + r as u64).1)
        .into_iter()
        .filter(|&p| p)
        .count();
    assert!(rejected as f64 > 0.9 * reps as f64, "{rejected} of {reps}");
}

#[test]
fn loglogistic_recovery_within_bootstrap_error() {
    let truth = LogLogisticHazard::new(0.1, 3.0).unwrap();
    let x = sample_intervals(&Hazard::LogLogistic(truth), 10_000, &RngStream::new(63, 0));
    let fit = fit_loglogistic(&x).unwrap();
    let fitted = Hazard::LogLogistic(LogLogisticHazard::new(fit.alpha, fit.beta).unwrap());
    let boot: Vec<(f64, f64)> = map_range(60, Execution::default(), |b| {
        let y = sample_intervals(&fitted, 10_000, &RngStream::new(64, b as u64));
        let f = fit_loglogistic(&y).unwrap();
        (f.alpha, f.beta)
    });
    let sd = |v: Vec<f64>| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    };
    let se_alpha = sd(boot.iter().map(|b| b.0).collect());
    let se_beta = sd(boot.iter().map(|b| b.1).collect());
    assert!((fit.alpha - 0.1).abs() < 3.0 * se_alpha, "alpha {} ± {se_alpha}", fit.alpha);
    assert!((fit.beta - 3.0).abs() < 3.0 * se_beta, "beta {} ± {se_beta}", fit.beta);
}
