//! First passage of a Wiener process through the square-root boundary
//! c(t) = a + b√t.
//!
//! The first-passage density f solves the Volterra equation of the first kind
//!
//! ```text
//! 1 − Φ(c(t)/√t) = ∫₀ᵗ [1 − Φ((c(t) − c(s))/√(t − s))] f(s) ds
//! ```
//!
//! which is discretized with the mid-point rule (f evaluated at the centre of
//! each step) and solved by forward substitution. The two-sided coverage of
//! the band ±c(t) on [0, 1] is taken as 1 − 2·P(first passage ≤ 1).

use crate::error::{Error, Result};
use crate::special::normal_sf;
use serde::{Deserialize, Serialize};

pub const DEFAULT_STEP: f64 = 1e-3;

/// Published 95% band offset.
pub const A_95: f64 = 0.299944595870772;
/// Published 95% band slope.
pub const B_95: f64 = 2.34797018726827;
/// Published 99% band offset.
pub const A_99: f64 = 0.313071417065285;
/// Published 99% band slope.
pub const B_99: f64 = 2.88963206734397;

/// The band ±(a + b√t) and the two-sided coverage it targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub a: f64,
    pub b: f64,
    pub level: f64,
    pub step: f64,
}

impl BoundarySpec {
    pub fn new(a: f64, b: f64, level: f64, step: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0 && b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!("band needs a >= 0 and b > 0, got a = {a}, b = {b}")));
        }
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::InvalidParameter(format!("band level must lie in (0, 1), got {level}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter(format!("integration step must be positive, got {step}")));
        }
        Ok(Self { a, b, level, step })
    }

    pub fn standard_95() -> Self {
        Self { a: A_95, b: B_95, level: 0.95, step: DEFAULT_STEP }
    }

    pub fn standard_99() -> Self {
        Self { a: A_99, b: B_99, level: 0.99, step: DEFAULT_STEP }
    }

    /// The published band for coverage 0.95 or 0.99.
    pub fn published(level: f64) -> Option<Self> {
        if (level - 0.95).abs() < 1e-12 {
            Some(Self::standard_95())
        } else if (level - 0.99).abs() < 1e-12 {
            Some(Self::standard_99())
        } else {
            None
        }
    }

    /// The published band when there is one, otherwise a calibrated band
    /// with the offset fixed at 0.3.
    pub fn for_level(level: f64) -> Result<Self> {
        match Self::published(level) {
            Some(spec) => Ok(spec),
            None => calibrate_band(1.0 - level, 0.3, DEFAULT_STEP),
        }
    }

    /// c(t) = a + b√t.
    pub fn value(&self, t: f64) -> f64 {
        self.a + self.b * t.max(0.0).sqrt()
    }
}

/// A first-passage probability with its discretization error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstPassage {
    pub probability: f64,
    pub error_bound: f64,
}

/// Mid-point solution of the Volterra equation for an arbitrary continuous
/// boundary with c(0) > 0. Returns P(τ ≤ k·step) for k = 1..=steps.
pub fn first_passage_curve<C: Fn(f64) -> f64>(boundary: C, step: f64, steps: usize) -> Vec<f64> {
    let h = step;
    let mids: Vec<f64> = (0..steps).map(|j| (j as f64 + 0.5) * h).collect();
    let c_mid: Vec<f64> = mids.iter().map(|&s| boundary(s)).collect();
    let mut density = vec![0.0; steps];
    let mut cumulative = Vec::with_capacity(steps);
    let mut mass = 0.0;
    for i in 0..steps {
        let t = (i + 1) as f64 * h;
        let ct = boundary(t);
        let target = normal_sf(ct / t.sqrt());
        let mut acc = 0.0;
        for j in 0..i {
            let kernel = normal_sf((ct - c_mid[j]) / (t - mids[j]).sqrt());
            acc += kernel * density[j];
        }
        let diagonal = normal_sf((ct - c_mid[i]) / (t - mids[i]).sqrt());
        let fi = ((target / h - acc) / diagonal).max(0.0);
        density[i] = fi;
        mass += fi * h;
        cumulative.push(mass);
    }
    cumulative
}

fn steps_for(step: f64, t_max: f64) -> Result<usize> {
    if !(step > 0.0) || !(t_max > 0.0) {
        return Err(Error::InvalidParameter(format!("need step > 0 and t_max > 0, got {step}, {t_max}")));
    }
    let ratio = t_max / step;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) || steps < 1.0 {
        return Err(Error::InvalidParameter(format!("step {step} does not divide t_max {t_max}")));
    }
    Ok(steps as usize)
}

fn passage_probability(a: f64, b: f64, step: f64, steps: usize) -> f64 {
    *first_passage_curve(|t| a + b * t.sqrt(), step, steps).last().unwrap_or(&0.0)
}

/// P(first passage through a + b√t occurs by `t_max`), with an error
/// estimate from repeating the solve at a different step. The estimate is
/// |P(h) − P(2h)| (or |P(h) − P(h/2)| when t_max/h is odd), which bounds the
/// remaining error of a convergent scheme of order at least one.
pub fn first_passage_cdf(spec: &BoundarySpec, t_max: f64) -> Result<FirstPassage> {
    first_passage_raw(spec.a, spec.b, spec.step, t_max)
}

fn first_passage_raw(a: f64, b: f64, step: f64, t_max: f64) -> Result<FirstPassage> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("boundary offset must be positive, got a = {a}")));
    }
    if !(b >= 0.0 && b.is_finite() && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("boundary slope must be finite and non-negative, got b = {b}")));
    }
    let steps = steps_for(step, t_max)?;
    let p = passage_probability(a, b, step, steps);
    let other = if steps % 2 == 0 {
        passage_probability(a, b, 2.0 * step, steps / 2)
    } else {
        passage_probability(a, b, 0.5 * step, steps * 2)
    };
    Ok(FirstPassage { probability: p, error_bound: (p - other).abs() })
}

/// Two-sided coverage interval of the band on [0, 1]:
/// [1 − 2(P + err), 1 − 2(P − err)].
pub fn verify_band(spec: &BoundarySpec) -> Result<(f64, f64)> {
    if spec.step > 0.01 {
        return Err(Error::InvalidParameter(format!("verification needs step <= 0.01, got {}", spec.step)));
    }
    let fp = first_passage_cdf(spec, 1.0)?;
    Ok((1.0 - 2.0 * (fp.probability + fp.error_bound), 1.0 - 2.0 * (fp.probability - fp.error_bound)))
}

/// Find b such that P(first passage through a_fixed + b√t by t = 1) = α/2,
/// by bisection (the probability decreases in b).
pub fn calibrate_band(alpha: f64, a_fixed: f64, step: f64) -> Result<BoundarySpec> {
    if !(alpha > 0.0 && alpha < 0.5 + 1e-12) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 0.5), got {alpha}")));
    }
    if !(a_fixed > 0.0 && a_fixed.is_finite()) {
        return Err(Error::InvalidParameter(format!("offset must be positive, got {a_fixed}")));
    }
    let steps = steps_for(step, 1.0)?;
    let target = 0.5 * alpha;
    let (mut low, mut high) = (0.0, 10.0);
    let excess = |b: f64| passage_probability(a_fixed, b, step, steps) - target;
    if excess(low) < 0.0 || excess(high) > 0.0 {
        return Err(Error::Bracket { low, high });
    }
    for _ in 0..200 {
        let mid = 0.5 * (low + high);
        let e = excess(mid);
        if e.abs() < 1e-9 || high - low < 1e-13 {
            low = mid;
            high = mid;
            break;
        }
        if e > 0.0 {
            low = mid;
        } else {
            high = mid;
        }
    }
    let b = 0.5 * (low + high);
    if b <= 0.0 {
        return Err(Error::Bracket { low: 0.0, high: 10.0 });
    }
    BoundarySpec::new(a_fixed, b, 1.0 - alpha, step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_cdf;

    #[test]
    fn constant_boundary_follows_reflection() {
        let fp = first_passage_raw(2.0, 1e-12, 1e-3, 1.0).unwrap();
        let exact = 2.0 * (1.0 - normal_cdf(2.0));
        assert!((fp.probability - exact).abs() < 1e-3, "{} vs {exact}", fp.probability);
    }

    #[test]
    fn published_95_band() {
        let fp = first_passage_cdf(&BoundarySpec::standard_95(), 1.0).unwrap();
        let coverage = 1.0 - 2.0 * fp.probability;
        assert!(coverage > 0.9499 && coverage < 0.9501, "{coverage}");
        let (lo, hi) = verify_band(&BoundarySpec::standard_95()).unwrap();
        assert!(lo <= 0.95 && 0.95 <= hi, "[{lo}, {hi}]");
    }

    #[test]
    fn published_99_band() {
        let (lo, hi) = verify_band(&BoundarySpec::standard_99()).unwrap();
        assert!(lo > 0.98998 && hi < 0.99002, "[{lo}, {hi}]");
    }

    #[test]
    fn unreachable_boundary() {
        let spec = BoundarySpec::new(100.0, 2.0, 0.95, 1e-3).unwrap();
        assert!(first_passage_cdf(&spec, 1.0).unwrap().probability < 1e-12);
    }

    #[test]
    fn wider_band_has_more_coverage() {
        let base = BoundarySpec::standard_95();
        let wide = BoundarySpec { a: 2.0 * base.a, b: 2.0 * base.b, ..base };
        let p = first_passage_cdf(&base, 1.0).unwrap().probability;
        let q = first_passage_cdf(&wide, 1.0).unwrap().probability;
        assert!(q < p);
    }

    #[test]
    fn monotone_in_horizon_and_coefficients() {
        let curve = first_passage_curve(|t| 0.3 + 2.0 * t.sqrt(), 1e-3, 1000);
        assert!(curve.windows(2).all(|w| w[1] >= w[0]));
        let mut previous = f64::INFINITY;
        for i in 0..6 {
            let a = 0.1 + 0.1 * i as f64;
            let p = first_passage_raw(a, 2.0, 1e-3, 1.0).unwrap().probability;
            assert!(p <= previous);
            previous = p;
        }
        previous = f64::INFINITY;
        for i in 0..6 {
            let b = 1.0 + 0.5 * i as f64;
            let p = first_passage_raw(0.3, b, 1e-3, 1.0).unwrap().probability;
            assert!(p <= previous);
            previous = p;
        }
    }

    #[test]
    fn halving_step_stays_within_error_bound() {
        for &(a, b) in &[(A_95, B_95), (A_99, B_99), (0.5, 1.5)] {
            let fp = first_passage_raw(a, b, 1e-3, 1.0).unwrap();
            let finer = first_passage_raw(a, b, 5e-4, 1.0).unwrap();
            assert!((finer.probability - fp.probability).abs() < fp.error_bound, "a = {a}, b = {b}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(first_passage_raw(0.0, 1.0, 1e-3, 1.0).is_err());
        assert!(first_passage_raw(0.3, 1.0, 3e-3, 1.0).is_err());
        assert!(BoundarySpec::new(0.3, 0.0, 0.95, 1e-3).is_err());
        assert!(verify_band(&BoundarySpec { step: 0.02, ..BoundarySpec::standard_95() }).is_err());
    }

    #[test]
    fn calibration_recovers_published_slopes() {
        let b95 = calibrate_band(0.05, A_95, 1e-3).unwrap();
        assert!((b95.b - B_95).abs() < 2e-3, "{}", b95.b);
        let b99 = calibrate_band(0.01, A_99, 1e-3).unwrap();
        assert!((b99.b - B_99).abs() < 2e-3, "{}", b99.b);
        let p = first_passage_cdf(&b95, 1.0).unwrap().probability;
        assert!((p - 0.025).abs() < 1e-5);
    }

    #[test]
    fn calibration_near_zero_slope() {
        // constant boundary a hits α/2 = 0.25 at a = Φ⁻¹(0.875) ≈ 1.1503
        let spec = calibrate_band(0.5, 1.1, 1e-3).unwrap();
        assert!(spec.b > 0.0 && spec.b < 0.1, "{}", spec.b);
        assert!(matches!(calibrate_band(0.5, 1.3, 1e-3), Err(Error::Bracket { .. })));
    }
}
