//! Scaled partial-sum path of the centred transformed intervals and the
//! square-root band test on it.

use super::{PlotData, Series, SeriesKind, TestReport, Verdict};
use crate::boundary::BoundarySpec;
use crate::error::{Error, Result};
use crate::trains::TransformedTrain;
use serde::{Deserialize, Serialize};

/// X^n at the step locations k/n, k = 0, …, n; `values[k]` = S_k/√n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WienerPath {
    pub n: usize,
    pub step_times: Vec<f64>,
    pub values: Vec<f64>,
}

impl WienerPath {
    /// Path from its values at k/n, starting with the value at 0.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFew { what: "path values", required: 2, got: values.len() });
        }
        let n = values.len() - 1;
        let step_times = (0..=n).map(|k| k as f64 / n as f64).collect();
        Ok(Self { n, step_times, values })
    }
}

/// ξ_j = Λ_{j+1} − Λ_j − 1, partial sums scaled by 1/√n with n the number
/// of intervals.
pub fn build_wiener_path(tt: &TransformedTrain) -> Result<WienerPath> {
    if tt.len() < 2 {
        return Err(Error::TooFew { what: "transformed times", required: 2, got: tt.len() });
    }
    let l = tt.lambdas();
    let n = l.len() - 1;
    let scale = (n as f64).sqrt();
    let origin = l[0];
    // S_k = Λ_{k+1} − Λ_1 − k, computed from the times to avoid drift
    let values = l.iter().enumerate().map(|(k, &x)| (x - origin - k as f64) / scale).collect();
    WienerPath::from_values(values)
}

/// Pass iff |X^n| < a + b√t at every step location. Since the band widens
/// with t, the left end of each step is the binding one.
pub fn wiener_process_test(path: &WienerPath, band: &BoundarySpec) -> TestReport {
    let mut first_exit = None;
    let mut max_ratio: f64 = 0.0;
    for (k, (&t, &v)) in path.step_times.iter().zip(&path.values).enumerate() {
        let limit = band.value(t);
        max_ratio = max_ratio.max(v.abs() / limit);
        if first_exit.is_none() && !(v.abs() < limit) {
            first_exit = Some(k);
        }
    }
    let pass = first_exit.is_none();

    let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    let upper: Vec<f64> = grid.iter().map(|&t| band.value(t)).collect();
    let lower: Vec<f64> = upper.iter().map(|u| -u).collect();
    let mut series = vec![
        Series::new("path", SeriesKind::Step, path.step_times.clone(), path.values.clone()),
        Series::new("upper boundary", SeriesKind::Dotted, grid.clone(), upper),
        Series::new("lower boundary", SeriesKind::Dotted, grid, lower),
    ];
    let mut statistics = vec![
        ("max_boundary_ratio".to_string(), max_ratio),
        ("terminal_value".to_string(), *path.values.last().unwrap_or(&0.0)),
        ("a".to_string(), band.a),
        ("b".to_string(), band.b),
    ];
    if let Some(k) = first_exit {
        let (t, v) = (path.step_times[k], path.values[k]);
        statistics.push(("first_exit_time".to_string(), t));
        statistics.push(("first_exit_value".to_string(), v));
        series.push(Series::new("first exit", SeriesKind::Points, vec![t], vec![v]));
    }
    TestReport {
        test_name: "wiener".to_string(),
        statistics: statistics.into_iter().collect(),
        p_value: None,
        verdict_at: vec![Verdict { level: 1.0 - band.level, pass }],
        plot_data: PlotData { x_label: "t".to_string(), y_label: "X^n_t".to_string(), log_scale: false, series },
        notes: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_increments_give_zero_path() {
        let tt = TransformedTrain::from_increments(&[1.0; 20]).unwrap();
        let path = build_wiener_path(&tt).unwrap();
        assert!(path.values.iter().all(|&v| v.abs() < 1e-14));
        for band in [BoundarySpec::standard_95(), BoundarySpec::standard_99()] {
            let r = wiener_process_test(&path, &band);
            assert_eq!(r.passes_at(1.0 - band.level), Some(true));
        }
    }

    #[test]
    fn hand_computed_path() {
        let tt = TransformedTrain::from_increments(&[2.0, 0.5, 1.5]).unwrap();
        let path = build_wiener_path(&tt).unwrap();
        assert_eq!(path.n, 3);
        let s3 = 3f64.sqrt();
        for (v, e) in path.values.iter().zip([0.0, 1.0, 0.5, 1.0]) {
            assert_relative_eq!(*v, e / s3, epsilon = 1e-15);
        }
        assert_eq!(path.step_times, vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
    }

    #[test]
    fn terminal_value_telescopes() {
        let l = vec![0.3, 1.0, 1.2, 4.0, 4.5];
        let tt = TransformedTrain::new(l.clone(), 5.0).unwrap();
        let path = build_wiener_path(&tt).unwrap();
        let n = (l.len() - 1) as f64;
        assert_relative_eq!(*path.values.last().unwrap(), (4.5 - 0.3 - n) / n.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn single_large_value_fails_at_its_time() {
        let path = WienerPath::from_values(vec![0.0, 10.0, 0.0]).unwrap();
        let r = wiener_process_test(&path, &BoundarySpec::standard_95());
        assert_eq!(r.passes_at(0.05), Some(false));
        assert_eq!(r.statistic("first_exit_time"), Some(0.5));
        assert_eq!(r.statistic("first_exit_value"), Some(10.0));
    }

    #[test]
    fn needs_two_times() {
        let tt = TransformedTrain::new(vec![0.0], 1.0).unwrap();
        assert!(build_wiener_path(&tt).is_err());
    }

    #[test]
    fn censored_tail_does_not_change_the_verdict() {
        let tt = TransformedTrain::from_increments(&[0.2, 3.0, 0.1, 0.4, 2.5, 0.9]).unwrap();
        let longer = tt.with_total(tt.total() + 7.0).unwrap();
        let band = BoundarySpec::standard_95();
        let a = wiener_process_test(&build_wiener_path(&tt).unwrap(), &band);
        let b = wiener_process_test(&build_wiener_path(&longer).unwrap(), &band);
        assert_eq!(a.verdict_at, b.verdict_at);
    }
}
