//! Thinning simulation of conditional-intensity models and the elementary
//! samplers used by the Monte Carlo studies.

use crate::error::{Error, Result};
use crate::intensity::{Hazard, IntensityModel};
use crate::trains::SpikeTrain;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1, InverseGaussian};
use serde::{Deserialize, Serialize};

/// Grid points used to bound λ over a proposal window.
const BOUND_GRID: usize = 64;
const BOUND_SAFETY: f64 = 1.2;

/// Identifies one reproducible random stream. The generator is ChaCha8,
/// keyed by `seed` with `stream_id` selecting the stream, so workers can
/// draw independently and still reproduce every replicate exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// An independent child stream, e.g. one per replicate or per shuffle.
    pub fn derive(&self, index: u64) -> Self {
        Self { seed: splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(1))), stream_id: index }
    }
}

/// `n` independent rate-1 exponential draws.
pub fn sample_unit_exponentials(n: usize, stream: &RngStream) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..n).map(|_| Exp1.sample(&mut rng)).collect()
}

/// Draw one interval from a renewal hazard's interval distribution.
pub fn sample_interval<R: Rng + ?Sized>(hazard: &Hazard, rng: &mut R) -> f64 {
    match hazard {
        Hazard::InverseGaussian(h) => {
            // shape parameter of the standard (mean, shape) form is 1/σ²
            InverseGaussian::new(h.mu, 1.0 / h.sigma2).expect("validated parameters").sample(rng)
        }
        Hazard::LogLogistic(h) => {
            let u: f64 = rng.random();
            h.alpha * (u / (1.0 - u)).powf(1.0 / h.beta)
        }
        Hazard::Exponential { rate } => Exp::new(*rate).expect("validated rate").sample(rng),
    }
}

/// `n` iid intervals from a renewal hazard.
pub fn sample_intervals(hazard: &Hazard, n: usize, stream: &RngStream) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..n).map(|_| sample_interval(hazard, &mut rng)).collect()
}

fn window_length(model: &IntensityModel) -> f64 {
    let mut scale = model.hazard.time_scale();
    if let Some(s) = model.stimulus {
        scale = scale.min(1.0 / s.m);
    }
    2.0 * scale
}

/// Upper bound for λ(· | last) on [from, to]: the safety factor times the
/// larger of the grid maximum and the hazard's asymptote scaled by the
/// stimulus.
fn local_bound(model: &IntensityModel, from: f64, to: f64, last: f64) -> f64 {
    let asymptote = model.hazard.asymptote();
    let mut max_rate = 0.0f64;
    for i in 0..BOUND_GRID {
        let t = from + (to - from) * i as f64 / (BOUND_GRID - 1) as f64;
        let s = model.stimulus_value(t);
        let rate = model.log_intensity(t, last).exp();
        max_rate = max_rate.max(rate).max(asymptote * s.exp());
    }
    BOUND_SAFETY * max_rate
}

/// Simulate event times on (0, horizon] by thinning.
///
/// Each proposal window gets its own dominating rate; a proposal whose
/// intensity exceeds that rate aborts the simulation rather than bias it.
pub fn thin_simulate(model: &IntensityModel, horizon: f64, stream: &RngStream) -> Result<SpikeTrain> {
    model.validate()?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be finite and non-negative, got {horizon}")));
    }
    let mut rng = stream.rng();
    let mut events = Vec::new();
    let constant_rate = match (model.hazard, model.stimulus) {
        (Hazard::Exponential { rate }, None) => Some(rate),
        _ => None,
    };
    let window = window_length(model);

    let mut t = 0.0;
    let mut last = 0.0;
    while t < horizon {
        let window_end = (t + window).min(horizon);
        let bound = constant_rate.unwrap_or_else(|| local_bound(model, t, window_end, last));
        // proposals on [t, window_end] while the last event stays fixed
        loop {
            if bound <= 0.0 {
                t = window_end;
                break;
            }
            let step: f64 = Exp1.sample(&mut rng);
            let proposal = t + step / bound;
            if proposal > window_end {
                t = window_end;
                break;
            }
            let rate = match constant_rate {
                Some(rate) => rate,
                None => model.log_intensity(proposal, last).exp(),
            };
            if rate > bound {
                return Err(Error::BoundViolation { t: proposal, rate, bound });
            }
            t = proposal;
            let u: f64 = rng.random();
            if u * bound < rate {
                events.push(proposal);
                last = proposal;
                break;
            }
        }
    }
    SpikeTrain::new(events, horizon)
}

/// A renewal train with exactly `n` events, built from cumulative sums of
/// sampled intervals; the horizon is the last event.
pub fn simulate_renewal(hazard: &Hazard, n: usize, stream: &RngStream) -> Result<SpikeTrain> {
    hazard.validate()?;
    let mut rng = stream.rng();
    let mut acc = 0.0;
    let mut times = Vec::with_capacity(n);
    while times.len() < n {
        let x = sample_interval(hazard, &mut rng);
        // intervals below the float resolution of `acc` would collapse to ties
        if acc + x > acc {
            acc += x;
            times.push(acc);
        }
    }
    SpikeTrain::new(times, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intensity::{InverseGaussianHazard, StimulusTerm};

    #[test]
    fn empty_and_repeatable_exponentials() {
        let s = RngStream::new(7, 3);
        assert!(sample_unit_exponentials(0, &s).is_empty());
        assert_eq!(sample_unit_exponentials(100, &s), sample_unit_exponentials(100, &s));
        assert_ne!(sample_unit_exponentials(100, &s), sample_unit_exponentials(100, &RngStream::new(7, 4)));
    }

    #[test]
    fn derived_streams_differ() {
        let base = RngStream::new(1, 0);
        assert_ne!(base.derive(0), base.derive(1));
        assert_ne!(base.derive(0).rng().random::<u64>(), base.derive(1).rng().random::<u64>());
    }

    #[test]
    fn exponential_mean_law_of_large_numbers() {
        let n = 1_000_000;
        let xs = sample_unit_exponentials(n, &RngStream::new(2024, 0));
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 4.0 / (n as f64).sqrt(), "mean = {mean}");
    }

    #[test]
    fn zero_horizon_gives_empty_train() {
        let model = IntensityModel::renewal(Hazard::Exponential { rate: 5.0 });
        let train = thin_simulate(&model, 0.0, &RngStream::new(1, 1)).unwrap();
        assert!(train.is_empty());
        assert_eq!(train.horizon(), 0.0);
    }

    #[test]
    fn thinning_is_reproducible() {
        let model = IntensityModel::with_stimulus(
            Hazard::InverseGaussian(InverseGaussianHazard::new(0.075, 3.0).unwrap()),
            StimulusTerm::new(20.0, 5.0, 4.0).unwrap(),
        );
        let a = thin_simulate(&model, 10.0, &RngStream::new(11, 2)).unwrap();
        let b = thin_simulate(&model, 10.0, &RngStream::new(11, 2)).unwrap();
        assert_eq!(a, b);
        assert!(a.len() > 50);
        assert!(a.times().iter().all(|&t| t > 0.0 && t <= 10.0));
    }

    #[test]
    fn poisson_counts_from_constant_rate() {
        let c = 3.0;
        let horizon = 4.0;
        let model = IntensityModel::renewal(Hazard::Exponential { rate: c });
        let reps = 10_000;
        let counts: Vec<f64> = (0..reps)
            .map(|i| thin_simulate(&model, horizon, &RngStream::new(99, i)).unwrap().len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let lambda = c * horizon;
        // se(mean) = √(λ/R); se(var) ≈ √((2λ² + λ)/R) for Poisson counts
        assert!((mean - lambda).abs() < 4.0 * (lambda / reps as f64).sqrt(), "mean = {mean}");
        let var_se = ((2.0 * lambda * lambda + lambda) / reps as f64).sqrt();
        assert!((var - lambda).abs() < 4.0 * var_se, "var = {var}");
    }

    #[test]
    fn renewal_interval_samplers_match_means() {
        let cases = [
            (Hazard::InverseGaussian(InverseGaussianHazard::new(0.075, 3.0).unwrap()), 0.075, (0.075f64.powi(3) * 3.0).sqrt()),
            (Hazard::Exponential { rate: 2.0 }, 0.5, 0.5),
        ];
        for (hz, mean, sd) in cases {
            let n = 200_000;
            let xs = sample_intervals(&hz, n, &RngStream::new(5, 0));
            let m = xs.iter().sum::<f64>() / n as f64;
            assert!((m - mean).abs() < 4.0 * sd / (n as f64).sqrt(), "{hz:?}: {m}");
        }
        // log-logistic median is α
        let ll = Hazard::LogLogistic(crate::intensity::LogLogisticHazard::new(0.1, 3.0).unwrap());
        let xs = sample_intervals(&ll, 100_000, &RngStream::new(5, 1));
        let below = xs.iter().filter(|&&x| x < 0.1).count() as f64 / 1e5;
        assert!((below - 0.5).abs() < 4.0 * 0.5 / 1e5f64.sqrt());
    }
}
