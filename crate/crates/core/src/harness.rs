//! Monte Carlo studies of the Wiener band coverage and of how often pairs
//! of tests reject the same null sample.
//!
//! Replicate r at sample size n draws from `RngStream::new(seed, n).derive(r)`,
//! so every result is reproducible and independent of the execution mode.

use crate::boundary::BoundarySpec;
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::gof::{ks_pvalue, ks_statistic};
use crate::simulate::{sample_unit_exponentials, RngStream};
use crate::special::binomial_quantile;
use serde::{Deserialize, Serialize};

/// Sample sizes used when none are given.
pub const DEFAULT_SIZES: [usize; 9] = [10, 20, 50, 100, 200, 300, 500, 700, 900];

/// Confidence of the binomial reference bands.
pub const BAND_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub n: usize,
    pub replicates: usize,
    pub level: f64,
    pub pass_count: usize,
    pub empirical: f64,
    pub binomial_band: (f64, f64),
}

/// Counts of replicates rejected by each test, by each pair and by any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointRow {
    pub n: usize,
    pub replicates: usize,
    pub level: f64,
    pub uniform: usize,
    pub berman: usize,
    pub wiener: usize,
    pub berman_uniform: usize,
    pub wiener_berman: usize,
    pub wiener_uniform: usize,
    pub any: usize,
    /// Band on a pair count when the two tests are independent
    /// (rejection probability level²).
    pub independence_band: (usize, usize),
}

/// Central `confidence` interval of Binomial(replicates, p), in counts.
pub fn binomial_band_counts(replicates: usize, p: f64, confidence: f64) -> (usize, usize) {
    let tail = 0.5 * (1.0 - confidence);
    let r = replicates as u64;
    (binomial_quantile(r, p, tail) as usize, binomial_quantile(r, p, 1.0 - tail) as usize)
}

/// As [`binomial_band_counts`], as fractions of `replicates`.
pub fn binomial_band(replicates: usize, p: f64, confidence: f64) -> (f64, f64) {
    let (lo, hi) = binomial_band_counts(replicates, p, confidence);
    (lo as f64 / replicates as f64, hi as f64 / replicates as f64)
}

/// Whether the scaled partial sums of the centred increments stay strictly
/// inside ±(a + b√t) at every step location.
pub fn wiener_inside(increments: &[f64], band: &BoundarySpec) -> bool {
    let n = increments.len() as f64;
    let scale = n.sqrt();
    let mut s = 0.0;
    if !(0.0 < band.a) {
        return false;
    }
    for (k, &x) in increments.iter().enumerate() {
        s += x - 1.0;
        if !((s / scale).abs() < band.value((k + 1) as f64 / n)) {
            return false;
        }
    }
    true
}

fn replicate_stream(seed: u64, n: usize, r: usize) -> RngStream {
    RngStream::new(seed, n as u64).derive(r as u64)
}

/// Empirical coverage of each band for unit-exponential samples of each
/// size. All bands see the same samples.
pub fn coverage_experiment(
    sizes: &[usize],
    replicates: usize,
    bands: &[BoundarySpec],
    seed: u64,
    exec: Execution,
) -> Result<Vec<CoverageRow>> {
    if replicates < 100 {
        return Err(Error::TooFew { what: "replicates", required: 100, got: replicates });
    }
    let mut rows = Vec::with_capacity(sizes.len() * bands.len());
    for &n in sizes {
        if n == 0 {
            return Err(Error::InvalidParameter("sample sizes must be positive".to_string()));
        }
        let inside = map_range(replicates, exec, |r| {
            let x = sample_unit_exponentials(n, &replicate_stream(seed, n, r));
            bands.iter().map(|b| wiener_inside(&x, b)).collect::<Vec<_>>()
        });
        for (j, band) in bands.iter().enumerate() {
            let pass_count = inside.iter().filter(|v| v[j]).count();
            rows.push(CoverageRow {
                n,
                replicates,
                level: band.level,
                pass_count,
                empirical: pass_count as f64 / replicates as f64,
                binomial_band: binomial_band(replicates, band.level, BAND_CONFIDENCE),
            });
        }
    }
    Ok(rows)
}

/// Joint rejections of the uniform, Berman and Wiener tests on
/// unit-exponential samples.
pub fn joint_rejection_experiment(
    sizes: &[usize],
    replicates: usize,
    level: f64,
    seed: u64,
    exec: Execution,
) -> Result<Vec<JointRow>> {
    joint_rejection_experiment_with(sizes, replicates, level, seed, exec, sample_unit_exponentials)
}

/// As [`joint_rejection_experiment`] with increments drawn by `sampler`
/// (n, stream) instead of unit exponentials.
pub fn joint_rejection_experiment_with<S>(
    sizes: &[usize],
    replicates: usize,
    level: f64,
    seed: u64,
    exec: Execution,
    sampler: S,
) -> Result<Vec<JointRow>>
where
    S: Fn(usize, &RngStream) -> Vec<f64> + Sync + Send,
{
    if replicates < 1000 {
        return Err(Error::TooFew { what: "replicates", required: 1000, got: replicates });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("level must be in (0, 1), got {level}")));
    }
    let band = BoundarySpec::for_level(1.0 - level)?;
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        if n < 2 {
            return Err(Error::TooFew { what: "intervals per replicate", required: 2, got: n });
        }
        let outcomes = map_range(replicates, exec, |r| {
            let x = sampler(n, &replicate_stream(seed, n, r));
            rejections(&x, level, &band)
        });
        let count = |f: &dyn Fn(&[bool; 3]) -> bool| outcomes.iter().filter(|o| f(o)).count();
        rows.push(JointRow {
            n,
            replicates,
            level,
            uniform: count(&|o| o[0]),
            berman: count(&|o| o[1]),
            wiener: count(&|o| o[2]),
            berman_uniform: count(&|o| o[0] && o[1]),
            wiener_berman: count(&|o| o[1] && o[2]),
            wiener_uniform: count(&|o| o[0] && o[2]),
            any: count(&|o| o[0] || o[1] || o[2]),
            independence_band: binomial_band_counts(replicates, level * level, BAND_CONFIDENCE),
        });
    }
    Ok(rows)
}

/// Rejections by the uniform, Berman and Wiener tests of one sample of
/// increments.
fn rejections(increments: &[f64], level: f64, band: &BoundarySpec) -> [bool; 3] {
    let mut lambdas = Vec::with_capacity(increments.len());
    let mut acc = 0.0;
    for &x in increments {
        acc += x;
        lambdas.push(acc);
    }
    let interior: Vec<f64> = lambdas[..lambdas.len() - 1].iter().map(|l| l / acc).collect();
    let u: Vec<f64> = increments.iter().map(|&x| -(-x).exp_m1()).collect();
    let p_uniform = ks_pvalue(interior.len(), ks_statistic(&interior));
    let p_berman = ks_pvalue(u.len(), ks_statistic(&u));
    [p_uniform < level, p_berman < level, !wiener_inside(increments, band)]
}

pub fn coverage_csv(rows: &[CoverageRow]) -> String {
    let mut out = String::from("n,replicates,level,pass_count,empirical,band_low,band_high\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n, r.replicates, r.level, r.pass_count, r.empirical, r.binomial_band.0, r.binomial_band.1
        ));
    }
    out
}

pub fn joint_csv(rows: &[JointRow]) -> String {
    let mut out = String::from(
        "n,replicates,level,uniform,berman,wiener,berman_uniform,wiener_berman,wiener_uniform,any,band_low,band_high\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.replicates,
            r.level,
            r.uniform,
            r.berman,
            r.wiener,
            r.berman_uniform,
            r.wiener_berman,
            r.wiener_uniform,
            r.any,
            r.independence_band.0,
            r.independence_band.1
        ));
    }
    out
}
