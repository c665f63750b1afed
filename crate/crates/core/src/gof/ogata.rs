//! Tests on the uniformity, exponentiality, independence and count
//! variance of transformed events.

use super::ks::{ks_critical_value, ks_critical_value_approx, ks_pvalue, ks_statistic_sorted};

/// Above this sample size the plotted KS bands use the asymptotic critical value.
const EXACT_BAND_MAX_N: usize = 1000;
use super::{PlotData, Series, SeriesKind, TestReport, Verdict, REPORT_LEVELS};
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::simulate::RngStream;
use crate::special::binomial_quantile;
use crate::trains::TransformedTrain;
use rand::seq::SliceRandom;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Minimum number of complete windows per window size.
pub const MIN_WINDOWS: usize = 10;

fn require(tt: &TransformedTrain, required: usize) -> Result<()> {
    if tt.len() < required {
        return Err(Error::TooFew { what: "transformed times", required, got: tt.len() });
    }
    Ok(())
}

/// Empirical CDF of a sorted uniform sample with the KS bands at the
/// report levels.
fn ks_plot(sorted: &[f64], x_label: &str) -> PlotData {
    let m = sorted.len();
    let ecdf: Vec<f64> = (1..=m).map(|i| i as f64 / m as f64).collect();
    let mut series = vec![
        Series::new("empirical", SeriesKind::Step, sorted.to_vec(), ecdf),
        Series::new("uniform", SeriesKind::Line, vec![0.0, 1.0], vec![0.0, 1.0]),
    ];
    for level in REPORT_LEVELS {
        let c = if m <= EXACT_BAND_MAX_N { ks_critical_value(m, level) } else { ks_critical_value_approx(m, level) };
        let pct = format!("{:.0}%", 100.0 * (1.0 - level));
        series.push(Series::new(format!("band {pct} upper"), SeriesKind::Dotted, vec![0.0, 1.0], vec![c, 1.0 + c]));
        series.push(Series::new(format!("band {pct} lower"), SeriesKind::Dotted, vec![0.0, 1.0], vec![-c, 1.0 - c]));
    }
    PlotData { x_label: x_label.to_string(), y_label: "cumulative probability".to_string(), log_scale: false, series }
}

fn ks_report(name: &str, mut sample: Vec<f64>, x_label: &str) -> TestReport {
    sample.sort_by(f64::total_cmp);
    let d = ks_statistic_sorted(&sample);
    let p = ks_pvalue(sample.len(), d);
    let stats = vec![("ks_statistic".to_string(), d), ("sample_size".to_string(), sample.len() as f64)];
    TestReport::from_p_value(name, stats, p, ks_plot(&sample, x_label))
}

/// Interior transformed times, rescaled by the first and last event to
/// (0, 1), tested for uniformity with the exact KS distribution.
pub fn uniform_test(tt: &TransformedTrain) -> Result<TestReport> {
    require(tt, 3)?;
    let l = tt.lambdas();
    let (first, last) = (l[0], l[l.len() - 1]);
    let z: Vec<f64> = l[1..l.len() - 1].iter().map(|&x| (x - first) / (last - first)).collect();
    Ok(ks_report("uniform", z, "transformed time / last transformed time"))
}

/// u_k = 1 − exp(−(Λ_k − Λ_{k−1})).
pub fn berman_u(tt: &TransformedTrain) -> Vec<f64> {
    tt.increments().iter().map(|&x| -(-x).exp_m1()).collect()
}

/// KS test of the u_k against uniform(0, 1).
pub fn berman_test(tt: &TransformedTrain) -> Result<TestReport> {
    require(tt, 3)?;
    Ok(ks_report("berman", berman_u(tt), "u"))
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let mid = 0.5 * (start + end - 1) as f64 + 1.0;
        for &k in &order[start..end] {
            ranks[k] = mid;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Spearman rank correlation, midranks for ties; 0 when either side is
/// constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

fn lag_one(u: &[f64]) -> f64 {
    spearman(&u[..u.len() - 1], &u[1..])
}

/// Lag-one Spearman correlation of the u series with a two-sided
/// permutation p-value; shuffle k draws from `stream.derive(k)`.
pub fn serial_correlation_test(tt: &TransformedTrain, n_perm: usize, stream: &RngStream) -> Result<TestReport> {
    serial_correlation_test_with(tt, n_perm, stream, Execution::default())
}

pub fn serial_correlation_test_with(
    tt: &TransformedTrain,
    n_perm: usize,
    stream: &RngStream,
    exec: Execution,
) -> Result<TestReport> {
    require(tt, 4)?;
    if n_perm < 100 {
        return Err(Error::InvalidParameter(format!("n_perm must be at least 100, got {n_perm}")));
    }
    let u = berman_u(tt);
    let rho = lag_one(&u);
    let tol = 1e-12;
    let exceed = map_range(n_perm, exec, |k| {
        let mut shuffled = u.clone();
        shuffled.shuffle(&mut stream.derive(k as u64).rng());
        lag_one(&shuffled).abs() >= rho.abs() - tol
    })
    .into_iter()
    .filter(|&e| e)
    .count();
    let p = (1 + exceed) as f64 / (n_perm + 1) as f64;
    let plot = PlotData {
        x_label: "u_k".to_string(),
        y_label: "u_k+1".to_string(),
        log_scale: false,
        series: vec![Series::new("pairs", SeriesKind::Points, u[..u.len() - 1].to_vec(), u[1..].to_vec())],
    };
    let stats = vec![("spearman_rho".to_string(), rho), ("permutations".to_string(), n_perm as f64)];
    let mut report = TestReport::from_p_value("serial_correlation", stats, p, plot);
    report.notes.push("rank correlation with permutation p-value; quantification chosen by this library".to_string());
    Ok(report)
}

/// Ten logarithmically spaced window sizes from 2 to total / 20.
pub fn default_window_ladder(total: f64) -> Result<Vec<f64>> {
    let top = total / 20.0;
    if !(top > 2.0) {
        return Err(Error::TooFew { what: "transformed length (needs > 40)", required: 41, got: total as usize });
    }
    let (lo, hi) = (2f64.ln(), top.ln());
    Ok((0..10).map(|i| (lo + (hi - lo) * i as f64 / 9.0).exp()).collect())
}

struct WindowPoint {
    w: f64,
    windows: usize,
    mean: f64,
    variance: f64,
}

fn window_point(lambdas: &[f64], total: f64, w: f64) -> Result<WindowPoint> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::InvalidParameter(format!("window size must be positive, got {w}")));
    }
    let k = (total / w).floor() as usize;
    if k < MIN_WINDOWS {
        return Err(Error::TooFew { what: "complete windows", required: MIN_WINDOWS, got: k });
    }
    let mut counts = vec![0usize; k];
    for &x in lambdas {
        if x > 0.0 {
            let idx = (x / w).ceil() as usize;
            if (1..=k).contains(&idx) {
                counts[idx - 1] += 1;
            }
        }
    }
    let kf = k as f64;
    let mean = counts.iter().sum::<usize>() as f64 / kf;
    let variance = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (kf - 1.0);
    Ok(WindowPoint { w, windows: k, mean, variance })
}

fn variance_band(w: f64, windows: usize, level: f64) -> (f64, f64) {
    let dof = (windows - 1) as f64;
    let chi = ChiSquared::new(dof).expect("positive degrees of freedom");
    (w * chi.inverse_cdf(level / 2.0) / dof, w * chi.inverse_cdf(1.0 - level / 2.0) / dof)
}

fn count_outside(points: &[WindowPoint], level: f64) -> usize {
    points
        .iter()
        .filter(|p| {
            let (lo, hi) = variance_band(p.w, p.windows, level);
            !(p.variance >= lo && p.variance <= hi)
        })
        .count()
}

/// Largest number of pointwise misses still compatible with the null at
/// `level`.
fn allowed_misses(points: usize, level: f64) -> usize {
    binomial_quantile(points as u64, level, 1.0 - level) as usize
}

/// Count variance V_w over K_w non-overlapping windows of (0, total],
/// against the Poisson value w with pointwise chi-square bands.
pub fn variance_time_test(tt: &TransformedTrain, window_sizes: Option<&[f64]>) -> Result<TestReport> {
    variance_time_test_at(tt, window_sizes, &REPORT_LEVELS)
}

/// As [`variance_time_test`], with verdicts at the given levels. The test
/// passes at α when the number of window sizes whose variance falls
/// outside the pointwise 1 − α band is no larger than the (1 − α) quantile
/// of Binomial(L, α).
pub fn variance_time_test_at(
    tt: &TransformedTrain,
    window_sizes: Option<&[f64]>,
    levels: &[f64],
) -> Result<TestReport> {
    let ladder = match window_sizes {
        Some(ws) => ws.to_vec(),
        None => default_window_ladder(tt.total())?,
    };
    if ladder.is_empty() {
        return Err(Error::TooFew { what: "window sizes", required: 1, got: 0 });
    }
    let points = ladder.iter().map(|&w| window_point(tt.lambdas(), tt.total(), w)).collect::<Result<Vec<_>>>()?;
    let inside95 = points.len() - count_outside(&points, 0.05);
    let verdict_at = levels
        .iter()
        .map(|&level| Verdict { level, pass: count_outside(&points, level) <= allowed_misses(points.len(), level) })
        .collect();

    let ws: Vec<f64> = points.iter().map(|p| p.w).collect();
    let bands: Vec<(f64, f64)> = points.iter().map(|p| variance_band(p.w, p.windows, 0.05)).collect();
    let plot = PlotData {
        x_label: "window size".to_string(),
        y_label: "count variance".to_string(),
        log_scale: true,
        series: vec![
            Series::new("variance", SeriesKind::Points, ws.clone(), points.iter().map(|p| p.variance).collect()),
            Series::new("mean count", SeriesKind::Line, ws.clone(), points.iter().map(|p| p.mean).collect()),
            Series::new("poisson", SeriesKind::Line, ws.clone(), ws.clone()),
            Series::new("band 95% lower", SeriesKind::Dotted, ws.clone(), bands.iter().map(|b| b.0).collect()),
            Series::new("band 95% upper", SeriesKind::Dotted, ws, bands.iter().map(|b| b.1).collect()),
        ],
    };
    Ok(TestReport {
        test_name: "variance_time".to_string(),
        statistics: [
            ("fraction_inside".to_string(), inside95 as f64 / points.len() as f64),
            ("window_sizes".to_string(), points.len() as f64),
        ]
        .into(),
        p_value: None,
        verdict_at,
        plot_data: plot,
        notes: Vec::new(),
    })
}
