//! Normal-distribution tails, the chi-square density and adaptive quadrature.

use libm::erfc;
use statrs::distribution::{Binomial, DiscreteCDF};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

/// Standard normal CDF Φ(z).
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail 1 − Φ(z), accurate for large positive z.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// log Φ(z), finite for every finite z.
pub fn log_normal_cdf(z: f64) -> f64 {
    if z > -20.0 {
        normal_cdf(z).ln()
    } else {
        // Φ(z) = φ(z) R(−z) with R the Mills ratio
        -0.5 * z * z - LN_SQRT_2PI + mills_ratio(-z).ln()
    }
}

/// Mills ratio R(z) = (1 − Φ(z)) / φ(z), for z ≥ 0.
///
/// Uses the Laplace continued fraction above 3, where `erfc` would start
/// to lose relative accuracy against the exponentially small density.
pub fn mills_ratio(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z >= 3.0 {
        let mut t = 0.0;
        for k in (1..=80).rev() {
            t = k as f64 / (z + t);
        }
        1.0 / (z + t)
    } else {
        normal_sf(z) / normal_pdf(z)
    }
}

/// log R(z) for any real z. For very negative z the ratio grows like
/// exp(z²/2), so it is only ever handled in log form.
pub fn log_mills_ratio(z: f64) -> f64 {
    if z >= 0.0 {
        mills_ratio(z).ln()
    } else {
        let tail = normal_cdf(-z);
        tail.ln() + 0.5 * z * z + LN_SQRT_2PI
    }
}

/// Density of the chi-square distribution with 5 degrees of freedom.
pub fn chi2_5_pdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    // 2^{5/2} Γ(5/2) = 3 √(2π)
    x.powf(1.5) * (-0.5 * x).exp() / (3.0 * (2.0 * PI).sqrt())
}

/// Outcome of an adaptive Simpson integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Adaptive Simpson quadrature of `f` over [a, b] to the larger of the
/// relative tolerance `rel_tol` and the absolute tolerance `abs_tol`,
/// spending at most `budget` evaluations of `f`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    budget: usize,
) -> Quadrature {
    if b <= a {
        return Quadrature { value: 0.0, evaluations: 0, converged: true };
    }
    const PANELS: usize = 8;
    const MAX_DEPTH: u32 = 48;

    let h = (b - a) / (2 * PANELS) as f64;
    let ys: Vec<f64> = (0..=2 * PANELS).map(|i| f(a + i as f64 * h)).collect();
    let mut evaluations = ys.len();

    struct Panel {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    }

    let mut stack = Vec::with_capacity(64);
    let mut estimate = 0.0;
    for p in 0..PANELS {
        let (fa, fm, fb) = (ys[2 * p], ys[2 * p + 1], ys[2 * p + 2]);
        let whole = (2.0 * h) / 6.0 * (fa + 4.0 * fm + fb);
        estimate += whole;
        stack.push(Panel {
            a: a + (2 * p) as f64 * h,
            b: a + (2 * p + 2) as f64 * h,
            fa,
            fm,
            fb,
            whole,
            eps: 0.0,
            depth: 0,
        });
    }
    let eps = (rel_tol * estimate.abs()).max(abs_tol).max(f64::MIN_POSITIVE);
    for panel in &mut stack {
        panel.eps = eps / PANELS as f64;
    }

    let mut value = 0.0;
    let mut converged = true;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        evaluations += 2;
        let half = 0.5 * (p.b - p.a);
        let left = half / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = half / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let delta = left + right - p.whole;
        if delta.abs() <= 15.0 * p.eps || p.depth >= MAX_DEPTH {
            if p.depth >= MAX_DEPTH {
                converged = false;
            }
            value += left + right + delta / 15.0;
            continue;
        }
        if evaluations >= budget {
            converged = false;
            value += left + right + delta / 15.0;
            continue;
        }
        stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, eps: 0.5 * p.eps, depth: p.depth + 1 });
        stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, eps: 0.5 * p.eps, depth: p.depth + 1 });
    }
    Quadrature { value, evaluations, converged }
}

/// Smallest k with P(Bin(n, p) ≤ k) ≥ q.
pub fn binomial_quantile(n: u64, p: f64, q: f64) -> u64 {
    let dist = Binomial::new(p, n).expect("binomial parameters");
    (0..=n).find(|&k| dist.cdf(k) >= q).unwrap_or(n)
}
