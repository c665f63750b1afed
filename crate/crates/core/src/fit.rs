//! Maximum-likelihood fits of renewal interval models.
//!
//! The inverse-Gaussian and exponential fits have closed forms when every
//! interval is complete. Including the censored last gap, and the
//! log-logistic family in all cases, goes through a Nelder–Mead search on
//! log-parameters.

use crate::error::{Error, Result};
use crate::gof::{run_battery, BatteryConfig, TestReport};
use crate::intensity::{Hazard, IntensityModel, InverseGaussianHazard, LogLogisticHazard, DEFAULT_QUAD_TOL};
use crate::rescale::time_transform;
use crate::trains::{SpikeTrain, TransformedTrain};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Simplex diameter (log-parameter space) at which the search stops.
pub const SIMPLEX_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 10_000;
const RESTARTS: usize = 3;

/// Attached to every report produced on the data used for fitting.
pub const FITTED_CAVEAT: &str =
    "parameters were estimated from the tested data; bands do not have exactly their nominal coverage";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    InverseGaussian,
    LogLogistic,
    Exponential,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "inverse_gaussian" | "invgauss" | "ig" => Ok(Family::InverseGaussian),
            "log_logistic" | "loglogistic" => Ok(Family::LogLogistic),
            "exponential" | "poisson" => Ok(Family::Exponential),
            _ => Err(Error::InvalidParameter(format!("unknown family '{s}'"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::InverseGaussian => "inverse_gaussian",
            Family::LogLogistic => "log_logistic",
            Family::Exponential => "exponential",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvGaussFit {
    pub mu: f64,
    pub sigma2: f64,
    pub log_likelihood: f64,
    /// Set when the intervals show no dispersion (sigma2 collapses to 0).
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogisticFit {
    pub alpha: f64,
    pub beta: f64,
    pub log_likelihood: f64,
}

/// A fitted family with standard errors from the observed information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub hazard: Hazard,
    pub parameters: BTreeMap<String, f64>,
    pub standard_errors: BTreeMap<String, f64>,
    pub log_likelihood: f64,
    pub intervals: usize,
    pub censored_gap: Option<f64>,
}

fn check_intervals(intervals: &[f64], required: usize) -> Result<()> {
    if intervals.len() < required {
        return Err(Error::TooFew { what: "intervals", required, got: intervals.len() });
    }
    if let Some(&x) = intervals.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter(format!("intervals must be positive and finite, got {x}")));
    }
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn log_likelihood(hazard: &Hazard, intervals: &[f64], censored: Option<f64>) -> f64 {
    let mut ll: f64 = intervals.iter().map(|&x| hazard.log_density(x)).sum();
    if let Some(c) = censored {
        ll += hazard.log_survivor(c);
    }
    ll
}

/// Closed-form MLE: mu is the sample mean and sigma2 the mean of
/// 1/x − 1/mean.
pub fn fit_invgauss(intervals: &[f64]) -> Result<InvGaussFit> {
    check_intervals(intervals, 2)?;
    let mu = mean(intervals);
    let sigma2 = intervals.iter().map(|&x| 1.0 / x - 1.0 / mu).sum::<f64>() / intervals.len() as f64;
    if !(sigma2 > f64::EPSILON / mu) {
        return Ok(InvGaussFit { mu, sigma2: 0.0, log_likelihood: f64::INFINITY, degenerate: true });
    }
    let h = Hazard::InverseGaussian(InverseGaussianHazard { mu, sigma2 });
    Ok(InvGaussFit { mu, sigma2, log_likelihood: log_likelihood(&h, intervals, None), degenerate: false })
}

/// IG MLE with an optional right-censored gap, by simplex search started
/// at the closed-form estimate.
pub fn fit_invgauss_censored(intervals: &[f64], censored: Option<f64>) -> Result<InvGaussFit> {
    let closed = fit_invgauss(intervals)?;
    if closed.degenerate {
        return Err(Error::Degenerate("intervals show no dispersion".to_string()));
    }
    let Some(c) = censored.filter(|&c| c > 0.0) else { return Ok(closed) };
    let objective = |p: [f64; 2]| {
        let h = Hazard::InverseGaussian(InverseGaussianHazard { mu: p[0].exp(), sigma2: p[1].exp() });
        -log_likelihood(&h, intervals, Some(c))
    };
    let (best, value) = minimize_2d(objective, &[[closed.mu.ln(), closed.sigma2.ln()]])?;
    Ok(InvGaussFit { mu: best[0].exp(), sigma2: best[1].exp(), log_likelihood: -value, degenerate: false })
}

/// Log-logistic MLE by simplex search on (ln alpha, ln beta).
pub fn fit_loglogistic(intervals: &[f64]) -> Result<LogLogisticFit> {
    fit_loglogistic_censored(intervals, None)
}

pub fn fit_loglogistic_censored(intervals: &[f64], censored: Option<f64>) -> Result<LogLogisticFit> {
    check_intervals(intervals, 3)?;
    let logs: Vec<f64> = intervals.iter().map(|x| x.ln()).collect();
    let m = mean(&logs);
    let sd = (logs.iter().map(|l| (l - m).powi(2)).sum::<f64>() / (logs.len() - 1) as f64).sqrt();
    if !(sd > 1e-12) {
        return Err(Error::Degenerate("intervals show no dispersion".to_string()));
    }
    // ln x is logistic with location ln alpha and scale 1/beta
    let beta0 = std::f64::consts::PI / (3f64.sqrt() * sd);
    let mut sorted = logs.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let c = censored.filter(|&c| c > 0.0);
    let objective = |p: [f64; 2]| {
        let h = Hazard::LogLogistic(LogLogisticHazard { alpha: p[0].exp(), beta: p[1].exp() });
        -log_likelihood(&h, intervals, c)
    };
    let starts = [[median, beta0.ln()], [m, beta0.ln() + 0.5], [m, beta0.ln() - 0.5]];
    let (best, value) = minimize_2d(objective, &starts)?;
    Ok(LogLogisticFit { alpha: best[0].exp(), beta: best[1].exp(), log_likelihood: -value })
}

/// Exponential MLE: events over total exposure.
pub fn fit_exponential(intervals: &[f64], censored: Option<f64>) -> Result<f64> {
    check_intervals(intervals, 1)?;
    let exposure = intervals.iter().sum::<f64>() + censored.unwrap_or(0.0).max(0.0);
    Ok(intervals.len() as f64 / exposure)
}

/// Fit `family` to a train's intervals, optionally including the gap from
/// the last event to the horizon as a censored observation.
pub fn fit_train(train: &SpikeTrain, family: Family, include_censored: bool) -> Result<FitResult> {
    let intervals = train.intervals();
    let censored = if include_censored { train.censored_gap().filter(|&c| c > 0.0) } else { None };
    fit_family(&intervals, censored, family)
}

pub fn fit_family(intervals: &[f64], censored: Option<f64>, family: Family) -> Result<FitResult> {
    let (hazard, names) = match family {
        Family::InverseGaussian => {
            let f = fit_invgauss_censored(intervals, censored)?;
            (Hazard::InverseGaussian(InverseGaussianHazard::new(f.mu, f.sigma2)?), ["mu", "sigma2"].as_slice())
        }
        Family::LogLogistic => {
            let f = fit_loglogistic_censored(intervals, censored)?;
            (Hazard::LogLogistic(LogLogisticHazard::new(f.alpha, f.beta)?), ["alpha", "beta"].as_slice())
        }
        Family::Exponential => (Hazard::Exponential { rate: fit_exponential(intervals, censored)? }, ["rate"].as_slice()),
    };
    let params = parameters(&hazard);
    let build = |p: &[f64]| -> Option<Hazard> {
        let h = match family {
            Family::InverseGaussian => Hazard::InverseGaussian(InverseGaussianHazard { mu: p[0], sigma2: p[1] }),
            Family::LogLogistic => Hazard::LogLogistic(LogLogisticHazard { alpha: p[0], beta: p[1] }),
            Family::Exponential => Hazard::Exponential { rate: p[0] },
        };
        h.validate().ok().map(|_| h)
    };
    let nll = |p: &[f64]| build(p).map_or(f64::INFINITY, |h| -log_likelihood(&h, intervals, censored));
    let se = standard_errors(nll, &params);
    Ok(FitResult {
        hazard,
        parameters: names.iter().map(|s| s.to_string()).zip(params.iter().copied()).collect(),
        standard_errors: names.iter().map(|s| s.to_string()).zip(se).collect(),
        log_likelihood: log_likelihood(&hazard, intervals, censored),
        intervals: intervals.len(),
        censored_gap: censored,
    })
}

fn parameters(h: &Hazard) -> Vec<f64> {
    match h {
        Hazard::InverseGaussian(h) => vec![h.mu, h.sigma2],
        Hazard::LogLogistic(h) => vec![h.alpha, h.beta],
        Hazard::Exponential { rate } => vec![*rate],
    }
}

/// Square roots of the diagonal of the inverse finite-difference Hessian
/// of the negative log-likelihood; NaN where the Hessian is not positive
/// definite.
pub fn standard_errors<F: Fn(&[f64]) -> f64>(nll: F, theta: &[f64]) -> Vec<f64> {
    let k = theta.len();
    let h: Vec<f64> = theta.iter().map(|t| 1e-4 * t.abs().max(1e-8)).collect();
    let f0 = nll(theta);
    let eval = |shifts: &[(usize, f64)]| {
        let mut p = theta.to_vec();
        for &(i, s) in shifts {
            p[i] += s;
        }
        nll(&p)
    };
    let mut hess = vec![vec![0.0; k]; k];
    for i in 0..k {
        hess[i][i] = (eval(&[(i, h[i])]) - 2.0 * f0 + eval(&[(i, -h[i])])) / (h[i] * h[i]);
        for j in 0..i {
            let v = (eval(&[(i, h[i]), (j, h[j])]) - eval(&[(i, h[i]), (j, -h[j])]) - eval(&[(i, -h[i]), (j, h[j])])
                + eval(&[(i, -h[i]), (j, -h[j])]))
                / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    match k {
        1 if hess[0][0] > 0.0 => vec![(1.0 / hess[0][0]).sqrt()],
        2 => {
            let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
            if det > 0.0 && hess[0][0] > 0.0 {
                vec![(hess[1][1] / det).sqrt(), (hess[0][0] / det).sqrt()]
            } else {
                vec![f64::NAN; 2]
            }
        }
        _ => vec![f64::NAN; k],
    }
}

/// Nelder–Mead from each start, then restarts from the incumbent, keeping
/// the best vertex found.
pub fn minimize_2d<F: Fn([f64; 2]) -> f64>(f: F, starts: &[[f64; 2]]) -> Result<([f64; 2], f64)> {
    let better = |a: ([f64; 2], f64), b: ([f64; 2], f64)| if b.1 < a.1 { b } else { a };
    let mut best = nelder_mead(&f, starts[0], 0.1)?;
    for s in &starts[1..] {
        best = better(best, nelder_mead(&f, *s, 0.1)?);
    }
    for _ in 0..RESTARTS {
        best = better(best, nelder_mead(&f, best.0, 0.01)?);
    }
    let (x, v) = best;
    if !v.is_finite() {
        return Err(Error::Degenerate("likelihood is not finite at the optimum".to_string()));
    }
    Ok((x, v))
}

fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: &F, start: [f64; 2], step: f64) -> Result<([f64; 2], f64)> {
    let eval = |x: [f64; 2]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex = [start, [start[0] + step, start[1]], [start[0], start[1] + step]];
    let mut values = simplex.map(eval);
    for _ in 0..MAX_ITERATIONS {
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        let diameter = simplex[1..]
            .iter()
            .map(|v| ((v[0] - simplex[0][0]).powi(2) + (v[1] - simplex[0][1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        if diameter < SIMPLEX_TOL {
            return Ok((simplex[0], values[0]));
        }
        let centroid = [0.5 * (simplex[0][0] + simplex[1][0]), 0.5 * (simplex[0][1] + simplex[1][1])];
        let along = |t: f64| [centroid[0] + t * (simplex[2][0] - centroid[0]), centroid[1] + t * (simplex[2][1] - centroid[1])];
        let reflected = along(-1.0);
        let fr = eval(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = eval(expanded);
            (simplex[2], values[2]) = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < values[1] {
            (simplex[2], values[2]) = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < values[2] {
                let c = along(-0.5);
                (c, eval(c))
            } else {
                let c = along(0.5);
                (c, eval(c))
            };
            if fc < values[2].min(fr) {
                (simplex[2], values[2]) = (contracted, fc);
            } else {
                for i in 1..3 {
                    simplex[i] = [0.5 * (simplex[0][0] + simplex[i][0]), 0.5 * (simplex[0][1] + simplex[i][1])];
                    values[i] = eval(simplex[i]);
                }
            }
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS })
}

/// A fit and the five tests run on the train it was fitted to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedBattery {
    pub fit: FitResult,
    pub transformed: TransformedTrain,
    pub reports: Vec<TestReport>,
}

/// Fit `family` (censored gap included), time-transform the train with the
/// fitted renewal model and run the battery. Every report carries the
/// fitted-data caveat.
pub fn fitted_model_battery(train: &SpikeTrain, family: Family, config: &BatteryConfig) -> Result<FittedBattery> {
    if train.is_empty() {
        return Err(Error::TooFew { what: "events", required: 1, got: 0 });
    }
    let fit = fit_train(train, family, true)?;
    let model = IntensityModel::renewal(fit.hazard);
    let transformed = time_transform(train, &model, DEFAULT_QUAD_TOL)?;
    let mut reports = run_battery(&transformed, config)?;
    for r in &mut reports {
        r.notes.push(FITTED_CAVEAT.to_string());
    }
    Ok(FittedBattery { fit, transformed, reports })
}
