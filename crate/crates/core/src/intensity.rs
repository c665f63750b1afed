//! Conditional-intensity models built from a renewal hazard and an optional
//! multiplicative stimulus term:
//!
//! ```text
//! λ(t | H_t) = h(t − t_l) · exp(s(t)),   s(t) = p · f_χ²₅(m (t − t₀))
//! ```
//!
//! where `t_l` is the last event strictly before `t`.

use crate::error::{Error, Result};
use crate::special::{adaptive_simpson, chi2_5_pdf, log_mills_ratio, log_normal_cdf, normal_cdf};
use crate::trains::SpikeTrain;
use serde::{Deserialize, Serialize};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Default relative tolerance for segment quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;
/// Maximum integrand evaluations per inter-event segment.
pub const QUAD_BUDGET: usize = 10_000;
/// Absolute quadrature tolerance as a multiple of the relative one; a
/// segment whose integral is this small is already negligible in Λ.
const ABS_TOL_FACTOR: f64 = 1e-8;

/// ln(1 − eˣ) for x ≤ 0.
fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Inverse-Gaussian interval distribution with mean `mu` and dispersion
/// `sigma2` (the shape parameter is 1/sigma2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseGaussianHazard {
    pub mu: f64,
    pub sigma2: f64,
}

impl InverseGaussianHazard {
    pub fn new(mu: f64, sigma2: f64) -> Result<Self> {
        let h = Self { mu, sigma2 };
        h.validate()?;
        Ok(h)
    }

    fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite() && self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "inverse-Gaussian needs mu > 0 and sigma2 > 0, got mu = {}, sigma2 = {}",
                self.mu, self.sigma2
            )));
        }
        Ok(())
    }

    /// Standardized arguments (x − μ)/(μσ√x) and (x + μ)/(μσ√x).
    fn z(&self, x: f64) -> (f64, f64) {
        let scale = self.mu * (self.sigma2 * x).sqrt();
        ((x - self.mu) / scale, (x + self.mu) / scale)
    }

    pub fn log_density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let d = x - self.mu;
        -0.5 * (LN_2PI + 3.0 * x.ln() + self.sigma2.ln()) - d * d / (2.0 * x * self.sigma2 * self.mu * self.mu)
    }

    /// CDF written directly as Φ(z₁) + exp(2/(μσ²)) Φ(−z₂). Kept for
    /// moderate arguments and as a cross-check; the survivor is computed
    /// separately without the cancellation this form suffers in the tail.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let (z1, z2) = self.z(x);
        normal_cdf(z1) + (2.0 / (self.mu * self.sigma2)).exp() * normal_cdf(-z2)
    }

    /// ln S(x). Below the mean the CDF terms are both small and positive, so
    /// ln(1 − F) goes through `ln_1p`; above it S = φ(z₁)(R(z₁) − R(z₂)) with
    /// R the Mills ratio, which avoids the cancellation of 1 − F in the tail.
    pub fn log_survivor(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let (z1, z2) = self.z(x);
        if z1 < 0.0 {
            let f = normal_cdf(z1) + (2.0 / (self.mu * self.sigma2) + log_normal_cdf(-z2)).exp();
            return (-f).ln_1p();
        }
        let r1 = log_mills_ratio(z1);
        let r2 = log_mills_ratio(z2);
        -0.5 * z1 * z1 - 0.5 * LN_2PI + r1 + ln_one_minus_exp(r2 - r1)
    }

    /// ln h(x) = −½ ln(x³σ²) − ln(R(z₁) − R(z₂)).
    pub fn log_hazard(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let (z1, z2) = self.z(x);
        let r1 = log_mills_ratio(z1);
        let r2 = log_mills_ratio(z2);
        -0.5 * (3.0 * x.ln() + self.sigma2.ln()) - r1 - ln_one_minus_exp(r2 - r1)
    }

    /// Limit of the hazard for long elapsed times, 1/(2μ²σ²).
    pub fn asymptote(&self) -> f64 {
        1.0 / (2.0 * self.mu * self.mu * self.sigma2)
    }
}

/// Log-logistic interval distribution with scale `alpha` and shape `beta`:
/// survivor 1/(1 + (x/α)^β).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogisticHazard {
    pub alpha: f64,
    pub beta: f64,
}

impl LogLogisticHazard {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let h = Self { alpha, beta };
        h.validate()?;
        Ok(h)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite() && self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "log-logistic needs alpha > 0 and beta > 0, got alpha = {}, beta = {}",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    pub fn log_density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let lr = (x / self.alpha).ln();
        (self.beta / self.alpha).ln() + (self.beta - 1.0) * lr - 2.0 * (self.beta * lr).exp().ln_1p()
    }

    pub fn log_survivor(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        -(self.beta * (x / self.alpha).ln()).exp().ln_1p()
    }

    pub fn log_hazard(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return if self.beta < 1.0 {
                f64::INFINITY
            } else if self.beta == 1.0 {
                -self.alpha.ln()
            } else {
                f64::NEG_INFINITY
            };
        }
        let lr = (x / self.alpha).ln();
        (self.beta / self.alpha).ln() + (self.beta - 1.0) * lr - (self.beta * lr).exp().ln_1p()
    }
}

/// Renewal hazard families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Hazard {
    InverseGaussian(InverseGaussianHazard),
    LogLogistic(LogLogisticHazard),
    Exponential { rate: f64 },
}

impl Hazard {
    pub fn validate(&self) -> Result<()> {
        match self {
            Hazard::InverseGaussian(h) => h.validate(),
            Hazard::LogLogistic(h) => h.validate(),
            Hazard::Exponential { rate } => {
                if *rate > 0.0 && rate.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("exponential rate must be positive, got {rate}")))
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Hazard::InverseGaussian(_) => "inverse_gaussian",
            Hazard::LogLogistic(_) => "log_logistic",
            Hazard::Exponential { .. } => "exponential",
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match self {
            Hazard::InverseGaussian(h) => h.log_density(x),
            Hazard::LogLogistic(h) => h.log_density(x),
            Hazard::Exponential { rate } if x >= 0.0 => rate.ln() - rate * x,
            Hazard::Exponential { .. } => f64::NEG_INFINITY,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    pub fn log_survivor(&self, x: f64) -> f64 {
        match self {
            Hazard::InverseGaussian(h) => h.log_survivor(x),
            Hazard::LogLogistic(h) => h.log_survivor(x),
            Hazard::Exponential { rate } => -rate * x.max(0.0),
        }
    }

    pub fn survivor(&self, x: f64) -> f64 {
        self.log_survivor(x).exp()
    }

    pub fn log_hazard(&self, x: f64) -> f64 {
        match self {
            Hazard::InverseGaussian(h) => h.log_hazard(x),
            Hazard::LogLogistic(h) => h.log_hazard(x),
            Hazard::Exponential { rate } => rate.ln(),
        }
    }

    /// h(x) = f(x)/(1 − F(x)) at elapsed time `x`; the x → 0⁺ limit at 0.
    pub fn hazard(&self, x: f64) -> f64 {
        self.log_hazard(x).exp()
    }

    /// Closed-form cumulative hazard −ln S(x).
    pub fn cumulative_hazard(&self, x: f64) -> f64 {
        -self.log_survivor(x)
    }

    /// Whether h(x) is unbounded as x → 0⁺.
    fn singular_at_zero(&self) -> bool {
        matches!(self, Hazard::LogLogistic(h) if h.beta < 1.0)
    }

    /// Long-run hazard level, when it has a positive limit.
    pub fn asymptote(&self) -> f64 {
        match self {
            Hazard::InverseGaussian(h) => h.asymptote(),
            Hazard::LogLogistic(_) => 0.0,
            Hazard::Exponential { rate } => *rate,
        }
    }

    /// Time scale on which the hazard changes appreciably.
    pub fn time_scale(&self) -> f64 {
        match self {
            Hazard::InverseGaussian(h) => h.mu,
            Hazard::LogLogistic(h) => h.alpha,
            Hazard::Exponential { rate } => 1.0 / rate,
        }
    }
}

/// Multiplicative stimulus s(t) = p · f_χ²₅(m (t − t₀)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StimulusTerm {
    pub p: f64,
    pub m: f64,
    pub t0: f64,
}

impl StimulusTerm {
    pub fn new(p: f64, m: f64, t0: f64) -> Result<Self> {
        let s = Self { p, m, t0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.m > 0.0 && self.m.is_finite() && self.t0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "stimulus needs finite p, m > 0 and finite t0, got p = {}, m = {}, t0 = {}",
                self.p, self.m, self.t0
            )));
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= self.t0 {
            0.0
        } else {
            self.p * chi2_5_pdf(self.m * (t - self.t0))
        }
    }
}

/// λ(t | H_t) with H_t the last event time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityModel {
    pub hazard: Hazard,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stimulus: Option<StimulusTerm>,
}

impl IntensityModel {
    pub fn renewal(hazard: Hazard) -> Self {
        Self { hazard, stimulus: None }
    }

    pub fn with_stimulus(hazard: Hazard, stimulus: StimulusTerm) -> Self {
        Self { hazard, stimulus: Some(stimulus) }
    }

    /// Parse a model spec: either the JSON form of this type or key-value
    /// lines such as `family = inverse_gaussian`, `mu = 0.075`,
    /// `sigma2 = 3`, with `p`, `m`, `t0` adding a stimulus. `#` starts a
    /// comment.
    pub fn parse_spec(text: &str) -> Result<Self> {
        let model: Self = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::ModelSpec(e.to_string()))?
        } else {
            Self::parse_key_values(text)?
        };
        model.validate()?;
        Ok(model)
    }

    fn parse_key_values(text: &str) -> Result<Self> {
        let mut family = None;
        let mut values = std::collections::BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| Error::ModelSpec(format!("line {}: expected key = value", i + 1)))?;
            let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
            if key == "family" || key == "hazard" {
                family = Some(value.parse::<crate::fit::Family>()?);
                continue;
            }
            let key = key.strip_prefix("stimulus.").unwrap_or(&key).to_string();
            let v: f64 = value
                .parse()
                .map_err(|_| Error::ModelSpec(format!("line {}: cannot parse {value:?} as a number", i + 1)))?;
            if values.insert(key.clone(), v).is_some() {
                return Err(Error::ModelSpec(format!("line {}: duplicate key '{key}'", i + 1)));
            }
        }
        let has_stimulus = ["p", "m", "t0"].iter().any(|k| values.contains_key(*k));
        let mut take = |key: &str| {
            values.remove(key).ok_or_else(|| Error::ModelSpec(format!("missing key '{key}'")))
        };
        let hazard = match family.ok_or_else(|| Error::ModelSpec("missing key 'family'".into()))? {
            crate::fit::Family::InverseGaussian => Hazard::InverseGaussian(InverseGaussianHazard { mu: take("mu")?, sigma2: take("sigma2")? }),
            crate::fit::Family::LogLogistic => Hazard::LogLogistic(LogLogisticHazard { alpha: take("alpha")?, beta: take("beta")? }),
            crate::fit::Family::Exponential => Hazard::Exponential { rate: take("rate")? },
        };
        let stimulus = if has_stimulus {
            Some(StimulusTerm { p: take("p")?, m: take("m")?, t0: take("t0")? })
        } else {
            None
        };
        if let Some(key) = values.keys().next() {
            return Err(Error::ModelSpec(format!("unknown key '{key}'")));
        }
        Ok(Self { hazard, stimulus })
    }

    pub fn validate(&self) -> Result<()> {
        self.hazard.validate()?;
        if let Some(s) = &self.stimulus {
            s.validate()?;
        }
        Ok(())
    }

    pub fn stimulus_value(&self, t: f64) -> f64 {
        self.stimulus.map_or(0.0, |s| s.value(t))
    }

    /// ln λ(t) without range checks; `t == last_event` gives the right limit.
    pub fn log_intensity(&self, t: f64, last_event: f64) -> f64 {
        self.hazard.log_hazard(t - last_event) + self.stimulus_value(t)
    }

    fn intensity_unchecked(&self, t: f64, last_event: f64) -> f64 {
        self.log_intensity(t, last_event).exp()
    }

    /// λ(t | last event), for t strictly after the last event.
    pub fn conditional_intensity(&self, t: f64, last_event: f64) -> Result<f64> {
        if !(t > last_event) {
            return Err(Error::InvalidParameter(format!("t = {t} must follow the last event at {last_event}")));
        }
        Ok(self.intensity_unchecked(t, last_event))
    }

    /// λ(t | H_t) along a train: the history holds the events strictly
    /// before t (an unrecorded event at 0 when there is none), which makes
    /// the path left-continuous with a jump at every event.
    pub fn intensity_on_train(&self, train: &SpikeTrain, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= train.horizon()) {
            return Err(Error::OutOfWindow { t, horizon: train.horizon() });
        }
        let times = train.times();
        let before = times.partition_point(|&x| x < t);
        let last = if before == 0 { 0.0 } else { times[before - 1] };
        self.conditional_intensity(t, last)
    }

    /// Whether the stimulus is non-zero somewhere inside (from, to).
    fn stimulus_active(&self, to: f64) -> bool {
        matches!(self.stimulus, Some(s) if s.p != 0.0 && to > s.t0)
    }

    /// ∫_from^to λ(u | last_event) du, for a segment containing no event.
    ///
    /// Where the stimulus vanishes the integral is the closed-form cumulative
    /// hazard; elsewhere the segment goes through [`Self::integrate_numerically`].
    pub fn integrated_intensity(&self, from: f64, to: f64, last_event: f64, tol: f64) -> Result<f64> {
        check_segment(from, to, last_event)?;
        if !self.stimulus_active(to) {
            return Ok(self.hazard.cumulative_hazard(to - last_event) - self.hazard.cumulative_hazard(from - last_event));
        }
        let onset = self.stimulus.map_or(from, |s| s.t0).max(from);
        let quiet = self.hazard.cumulative_hazard(onset - last_event) - self.hazard.cumulative_hazard(from - last_event);
        Ok(quiet + self.integrate_numerically(onset, to, last_event, tol)?)
    }

    /// Adaptive Simpson quadrature of λ over (from, to), with no closed-form
    /// shortcut. A hazard singular at zero elapsed time is integrated after
    /// the substitution x = w^(2/β), which removes the singularity.
    pub fn integrate_numerically(&self, from: f64, to: f64, last_event: f64, tol: f64) -> Result<f64> {
        check_segment(from, to, last_event)?;
        if to == from {
            return Ok(0.0);
        }
        let q = if let Hazard::LogLogistic(ll) = self.hazard {
            if self.hazard.singular_at_zero() {
                let k = 2.0 / ll.beta;
                let w0 = (from - last_event).powf(1.0 / k);
                let w1 = (to - last_event).powf(1.0 / k);
                adaptive_simpson(
                    |w| {
                        if w <= 0.0 {
                            // k w^{k−1} h(w^k) → k β/α^β · w^{kβ−1} = 2β/α^β · w
                            return 0.0;
                        }
                        let x = w.powf(k);
                        k * w.powf(k - 1.0) * self.intensity_unchecked(last_event + x, last_event)
                    },
                    w0,
                    w1,
                    tol,
                    tol * ABS_TOL_FACTOR,
                    QUAD_BUDGET,
                )
            } else {
                adaptive_simpson(|u| self.intensity_unchecked(u, last_event), from, to, tol, tol * ABS_TOL_FACTOR, QUAD_BUDGET)
            }
        } else {
            adaptive_simpson(|u| self.intensity_unchecked(u, last_event), from, to, tol, tol * ABS_TOL_FACTOR, QUAD_BUDGET)
        };
        if !q.converged || !q.value.is_finite() {
            return Err(Error::Quadrature { from, to, budget: QUAD_BUDGET });
        }
        Ok(q.value)
    }

    /// Log-likelihood of a train conditioned on its first event:
    /// Σ_{j≥2} ln λ(t_j) − Λ(t₁, T), the last gap entering as a censored term.
    pub fn log_likelihood(&self, train: &SpikeTrain, tol: f64) -> Result<f64> {
        let times = train.times();
        if times.is_empty() {
            return Err(Error::TooFew { what: "events", required: 1, got: 0 });
        }
        let mut total = 0.0;
        for w in times.windows(2) {
            let log_rate = self.log_intensity(w[1], w[0]);
            if log_rate == f64::NEG_INFINITY {
                return Err(Error::ZeroIntensity { t: w[1] });
            }
            total += log_rate - self.integrated_intensity(w[0], w[1], w[0], tol)?;
        }
        let last = times[times.len() - 1];
        if train.horizon() > last {
            total -= self.integrated_intensity(last, train.horizon(), last, tol)?;
        }
        Ok(total)
    }
}

fn check_segment(from: f64, to: f64, last_event: f64) -> Result<()> {
    if !(last_event <= from && from <= to) || !to.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "integration segment needs last_event <= from <= to, got {last_event}, {from}, {to}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1_hazard() -> InverseGaussianHazard {
        InverseGaussianHazard::new(0.075, 3.0).unwrap()
    }

    fn fig1_model() -> IntensityModel {
        IntensityModel::with_stimulus(Hazard::InverseGaussian(fig1_hazard()), StimulusTerm::new(20.0, 5.0, 4.0).unwrap())
    }

    #[test]
    fn key_value_spec_matches_json_spec() {
        let text = "# stimulus model\nfamily = inverse_gaussian\nmu = 0.075\nsigma2 = 3\np = 20\nm = 5\nt0 = 4\n";
        let json = serde_json::to_string(&fig1_model()).unwrap();
        assert_eq!(IntensityModel::parse_spec(text).unwrap(), fig1_model());
        assert_eq!(IntensityModel::parse_spec(&json).unwrap(), fig1_model());
    }

    #[test]
    fn malformed_specs_are_rejected() {
        for text in [
            "",
            "family = gamma\nrate = 1",
            "family = exponential",
            "family = exponential\nrate = 1\nshape = 2",
            "family = exponential\nrate = -1",
            "family = inverse_gaussian\nmu = 1\nsigma2 = 1\np = 3",
            "{\"hazard\": 3}",
        ] {
            assert!(IntensityModel::parse_spec(text).is_err(), "{text:?}");
        }
    }

    /// erf from the all-positive series e^{−x²} Σ 2ⁿ x^{2n+1} / (1·3·…·(2n+1)).
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term.abs() > 1e-18 * sum.abs() {
            n += 1.0;
            term *= 2.0 * x * x / (2.0 * n + 1.0);
            sum += term;
        }
        2.0 / std::f64::consts::PI.sqrt() * (-x * x).exp() * sum
    }

    fn phi_oracle(z: f64) -> f64 {
        0.5 * (1.0 + erf_series(z / std::f64::consts::SQRT_2))
    }

    #[test]
    fn ig_hazard_vanishes_near_zero() {
        let h = fig1_hazard();
        assert!(h.log_hazard(1e-4).exp() < 1e-60);
        assert!(h.log_hazard(1e-9).is_finite());
        assert_eq!(h.log_hazard(1e-9).exp(), 0.0);
    }

    #[test]
    fn ig_hazard_at_mean_matches_direct_formula() {
        let h = fig1_hazard();
        let (mu, s2, x) = (0.075f64, 3.0f64, 0.075f64);
        let scale = (x * s2 * mu * mu).sqrt();
        let f = (-(x - mu).powi(2) / (2.0 * x * s2 * mu * mu)).exp() / (2.0 * std::f64::consts::PI * x.powi(3) * s2).sqrt();
        let cdf = phi_oracle((x - mu) / scale) + (2.0 / (mu * s2)).exp() * phi_oracle((-x - mu) / scale);
        let expected = f / (1.0 - cdf);
        assert_relative_eq!(h.log_hazard(x).exp(), expected, max_relative = 1e-10);
        assert_relative_eq!(h.cdf(x), cdf, max_relative = 1e-10);
    }

    #[test]
    fn ig_hazard_approaches_asymptote() {
        let h = fig1_hazard();
        let asymptote = 1.0 / (2.0 * 0.075f64.powi(2) * 3.0);
        assert_relative_eq!(h.asymptote(), asymptote);
        assert!((asymptote - 29.63).abs() < 0.01);
        let at_ten = h.log_hazard(10.0).exp();
        assert!((at_ten - asymptote).abs() / asymptote < 0.01, "h(10) = {at_ten}");
        // far into the tail the direct CDF is useless but the log form holds
        let far = h.log_hazard(1e4).exp();
        assert!((far - asymptote).abs() / asymptote < 1e-3, "h(1e4) = {far}");
    }

    #[test]
    fn cumulative_hazard_stays_positive_for_short_intervals() {
        let h = Hazard::InverseGaussian(fig1_hazard());
        let small = h.cumulative_hazard(0.004);
        assert!(small > 0.0 && small < 1e-12, "{small}");
        assert!(h.cumulative_hazard(0.001) > 0.0);
        // continuous across the switch at the mean
        let below = h.cumulative_hazard(0.075 * (1.0 - 1e-12));
        let above = h.cumulative_hazard(0.075);
        assert!((below - above).abs() < 1e-10 * above);
    }

    #[test]
    fn survivor_agrees_with_direct_cdf_in_bulk() {
        let h = fig1_hazard();
        for &x in &[0.01, 0.05, 0.075, 0.2, 0.5] {
            assert_relative_eq!(h.log_survivor(x).exp(), 1.0 - h.cdf(x), max_relative = 1e-9);
        }
    }

    #[test]
    fn density_integrates_to_one_for_every_family() {
        let families = [
            Hazard::InverseGaussian(fig1_hazard()),
            Hazard::InverseGaussian(InverseGaussianHazard::new(1.0, 0.5).unwrap()),
            Hazard::LogLogistic(LogLogisticHazard::new(0.1, 3.0).unwrap()),
            Hazard::LogLogistic(LogLogisticHazard::new(2.0, 1.5).unwrap()),
            Hazard::Exponential { rate: 2.5 },
        ];
        for hz in families {
            // integrate in u = ln x so the heavy tails stay on a finite range
            let q = adaptive_simpson(|u: f64| hz.density(u.exp()) * u.exp(), -40.0, 12.0, 1e-11, 0.0, 200_000);
            assert!(q.converged, "{hz:?}");
            // log-logistic tail mass beyond e^12 is (α/e^12)^β
            let tail = hz.survivor(12f64.exp());
            assert!((q.value + tail - 1.0).abs() < 1e-6, "{hz:?}: {}", q.value);
        }
    }

    #[test]
    fn hazard_equals_density_over_survivor() {
        let families = [
            Hazard::InverseGaussian(fig1_hazard()),
            Hazard::LogLogistic(LogLogisticHazard::new(0.1, 3.0).unwrap()),
            Hazard::LogLogistic(LogLogisticHazard::new(0.5, 0.7).unwrap()),
            Hazard::Exponential { rate: 0.3 },
        ];
        for hz in families {
            for i in 1..60 {
                let x = 0.01 * i as f64;
                let ratio = hz.density(x) / hz.survivor(x);
                assert_relative_eq!(hz.hazard(x), ratio, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn stimulus_examples() {
        let s = StimulusTerm::new(20.0, 5.0, 4.0).unwrap();
        assert_eq!(s.value(3.9), 0.0);
        assert_eq!(s.value(4.0), 0.0);
        // f_χ²₅(3) = 3^{3/2} e^{-3/2} / (2^{5/2} Γ(5/2)), Γ(5/2) = 3√π/4
        let gamma_5_2 = 0.75 * std::f64::consts::PI.sqrt();
        let f3 = 3f64.powf(1.5) * (-1.5f64).exp() / (2f64.powf(2.5) * gamma_5_2);
        assert_relative_eq!(s.value(4.0 + 3.0 / 5.0), 20.0 * f3, max_relative = 1e-14);
        let q = adaptive_simpson(|t| s.value(t), 4.0, 4.0 + 200.0 / 5.0, 1e-12, 0.0, 100_000);
        assert_relative_eq!(q.value, 20.0 / 5.0, max_relative = 1e-9);
    }

    #[test]
    fn intensity_without_stimulus_is_the_hazard() {
        let hz = Hazard::InverseGaussian(fig1_hazard());
        let model = IntensityModel::renewal(hz);
        assert_relative_eq!(model.conditional_intensity(1.3, 1.2).unwrap(), hz.hazard(0.1), max_relative = 1e-13);
        assert!(model.conditional_intensity(1.0 + 1e-6, 1.0).unwrap() < 1e-100);
        assert!(model.conditional_intensity(1.0, 1.0).is_err());
        assert!(model.conditional_intensity(0.5, 1.0).is_err());
    }

    #[test]
    fn intensity_factorizes_under_stimulus() {
        let model = fig1_model();
        let s = StimulusTerm { p: 20.0, m: 5.0, t0: 4.0 };
        let expected = fig1_hazard().log_hazard(0.1).exp() * s.value(4.6).exp();
        assert_relative_eq!(model.conditional_intensity(4.6, 4.5).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn integrated_intensity_constant_rate() {
        let model = IntensityModel::renewal(Hazard::Exponential { rate: 3.0 });
        let v = model.integrated_intensity(1.0, 2.5, 0.5, 1e-8).unwrap();
        assert_relative_eq!(v, 4.5, max_relative = 1e-12);
        let q = model.integrate_numerically(1.0, 2.5, 0.5, 1e-8).unwrap();
        assert_relative_eq!(q, 4.5, max_relative = 1e-10);
    }

    #[test]
    fn quadrature_matches_closed_form_cumulative_hazard() {
        let families = [
            Hazard::InverseGaussian(fig1_hazard()),
            Hazard::InverseGaussian(InverseGaussianHazard::new(0.5, 1.0).unwrap()),
            Hazard::LogLogistic(LogLogisticHazard::new(0.1, 3.0).unwrap()),
            Hazard::LogLogistic(LogLogisticHazard::new(0.2, 0.6).unwrap()),
            Hazard::LogLogistic(LogLogisticHazard::new(0.2, 1.0).unwrap()),
        ];
        for hz in families {
            let model = IntensityModel::renewal(hz);
            for &(from, to) in &[(2.0, 2.05), (2.0, 2.3), (2.01, 3.0), (2.2, 2.4)] {
                let q = model.integrate_numerically(from, to, 2.0, 1e-10).unwrap();
                let exact = -hz.log_survivor(to - 2.0) + hz.log_survivor(from - 2.0);
                assert_relative_eq!(q, exact, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn integrated_intensity_is_additive_with_stimulus() {
        let model = fig1_model();
        let tol = 1e-8;
        let whole = model.integrated_intensity(4.1, 4.9, 4.05, tol).unwrap();
        let left = model.integrated_intensity(4.1, 4.4, 4.05, tol).unwrap();
        let right = model.integrated_intensity(4.4, 4.9, 4.05, tol).unwrap();
        assert!((whole - left - right).abs() <= 2.0 * tol * whole);
        // segment straddling the onset
        let straddle = model.integrated_intensity(3.9, 4.3, 3.85, tol).unwrap();
        let a = model.integrated_intensity(3.9, 4.0, 3.85, tol).unwrap();
        let b = model.integrated_intensity(4.0, 4.3, 3.85, tol).unwrap();
        assert!((straddle - a - b).abs() <= 2.0 * tol * straddle);
    }

    #[test]
    fn integrated_intensity_against_midpoint_oracle() {
        let model = fig1_model();
        let (from, to, last) = (4.3, 4.7, 4.25);
        let n = 400_000;
        let h = (to - from) / n as f64;
        let oracle: f64 = (0..n)
            .map(|i| {
                let u = from + (i as f64 + 0.5) * h;
                fig1_hazard().log_hazard(u - last).exp() * StimulusTerm { p: 20.0, m: 5.0, t0: 4.0 }.value(u).exp()
            })
            .sum::<f64>()
            * h;
        let v = model.integrated_intensity(from, to, last, 1e-10).unwrap();
        assert_relative_eq!(v, oracle, max_relative = 1e-8);
    }

    #[test]
    fn integrated_intensity_increases_in_upper_limit() {
        let model = fig1_model();
        let mut previous = 0.0;
        for i in 1..50 {
            let to = 3.9 + 0.02 * i as f64;
            let v = model.integrated_intensity(3.9, to, 3.88, 1e-8).unwrap();
            assert!(v > previous);
            previous = v;
        }
    }

    #[test]
    fn bad_segment_rejected() {
        let model = fig1_model();
        assert!(model.integrated_intensity(1.0, 0.5, 0.0, 1e-8).is_err());
        assert!(model.integrated_intensity(1.0, 2.0, 1.5, 1e-8).is_err());
    }

    #[test]
    fn log_likelihood_unit_rate() {
        let model = IntensityModel::renewal(Hazard::Exponential { rate: 1.0 });
        let train = SpikeTrain::new(vec![0.5, 1.0, 2.0, 3.5], 5.0).unwrap();
        assert_relative_eq!(model.log_likelihood(&train, 1e-8).unwrap(), -(5.0 - 0.5), max_relative = 1e-12);
    }

    #[test]
    fn log_likelihood_rate_c() {
        let c = 2.5f64;
        let model = IntensityModel::renewal(Hazard::Exponential { rate: c });
        let train = SpikeTrain::new(vec![0.5, 1.0, 2.0, 3.5], 5.0).unwrap();
        let expected = 3.0 * c.ln() - c * (5.0 - 0.5);
        assert_relative_eq!(model.log_likelihood(&train, 1e-8).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn log_likelihood_ig_renewal_factorizes() {
        let h = fig1_hazard();
        let model = IntensityModel::renewal(Hazard::InverseGaussian(h));
        let train = SpikeTrain::new(vec![0.1, 0.17, 0.3, 0.34, 0.5], 0.6).unwrap();
        let mut expected = 0.0;
        for w in train.times().windows(2) {
            let x: f64 = w[1] - w[0];
            expected += (-(x - 0.075).powi(2) / (2.0 * x * 3.0 * 0.075 * 0.075)).exp().ln()
                - 0.5 * (2.0 * std::f64::consts::PI * x.powi(3) * 3.0).ln();
        }
        expected += (1.0 - h.cdf(0.1)).ln();
        assert_relative_eq!(model.log_likelihood(&train, 1e-10).unwrap(), expected, max_relative = 1e-9);
    }

    #[test]
    fn log_likelihood_needs_events() {
        let model = fig1_model();
        assert!(model.log_likelihood(&SpikeTrain::empty(1.0), 1e-8).is_err());
    }

    #[test]
    fn model_json_shape() {
        let json = serde_json::to_string(&fig1_model()).unwrap();
        assert_eq!(
            json,
            r#"{"hazard":{"family":"inverse_gaussian","mu":0.075,"sigma2":3.0},"stimulus":{"p":20.0,"m":5.0,"t0":4.0}}"#
        );
        let back: IntensityModel = serde_json::from_str(r#"{"hazard":{"family":"exponential","rate":2}}"#).unwrap();
        assert_eq!(back, IntensityModel::renewal(Hazard::Exponential { rate: 2.0 }));
    }
}
