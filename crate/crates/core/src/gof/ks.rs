//! One-sample Kolmogorov statistic and its exact null distribution
//! (Marsaglia–Tsang–Wang matrix-power method).

/// Below this n·d² the matrix method is used; above it the two-term
/// asymptotic correction is accurate to better than 1e-7.
const ASYMPTOTIC_CUTOFF: f64 = 7.24;
const SCALE: f64 = 1e140;
const SCALE_EXP: i32 = 140;

/// D_n = sup |F_n(x) − x| for a sample on [0, 1].
pub fn ks_statistic(sample: &[f64]) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    ks_statistic_sorted(&sorted)
}

/// As [`ks_statistic`], for an already sorted sample.
pub fn ks_statistic_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let i = i as f64;
            ((i + 1.0) / n - x).max(x - i / n)
        })
        .fold(0.0, f64::max)
}

/// P(D_n < d).
pub fn ks_cdf(n: usize, d: f64) -> f64 {
    assert!(n >= 1, "ks_cdf needs n >= 1");
    let nf = n as f64;
    if d >= 1.0 {
        return 1.0;
    }
    if d <= 0.5 / nf {
        return 0.0;
    }
    let s = d * d * nf;
    if s > ASYMPTOTIC_CUTOFF {
        return 1.0 - 2.0 * (-(2.000071 + 0.331 / nf.sqrt() + 1.409 / nf) * s).exp();
    }
    matrix_cdf(n, d).clamp(0.0, 1.0)
}

/// Upper tail P(D_n ≥ d), the test p-value.
pub fn ks_pvalue(n: usize, d: f64) -> f64 {
    (1.0 - ks_cdf(n, d)).clamp(0.0, 1.0)
}

/// Smallest d with P(D_n < d) ≥ 1 − alpha, by bisection.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    let guess = ks_critical_value_approx(n, alpha);
    let (mut low, mut high) = ((0.5 / n as f64).max(0.8 * guess), (1.25 * guess).min(1.0));
    if ks_cdf(n, low) >= 1.0 - alpha {
        low = 0.5 / n as f64;
    }
    if ks_cdf(n, high) < 1.0 - alpha {
        high = 1.0;
    }
    while high - low > 1e-9 * high {
        let mid = 0.5 * (low + high);
        if ks_cdf(n, mid) < 1.0 - alpha {
            low = mid;
        } else {
            high = mid;
        }
    }
    high
}

/// Asymptotic critical value with the √n + 0.12 + 0.11/√n correction;
/// within about 1% of the exact value for n ≥ 35.
pub fn ks_critical_value_approx(n: usize, alpha: f64) -> f64 {
    let rn = (n as f64).sqrt();
    ((-(0.5 * alpha).ln()) / 2.0).sqrt() / (rn + 0.12 + 0.11 / rn)
}

struct Matrix {
    m: usize,
    data: Vec<f64>,
}

impl Matrix {
    fn mul(&self, other: &Matrix) -> Matrix {
        let m = self.m;
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            let row = &mut out[i * m..(i + 1) * m];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == 0.0 {
                    continue;
                }
                let other_row = &other.data[k * m..(k + 1) * m];
                for (o, &b) in row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Matrix { m, data: out }
    }

    fn centre(&self) -> f64 {
        let k = self.m / 2;
        self.data[k * self.m + k]
    }

    fn rescale(&mut self, exp: &mut i32) {
        if self.centre() > SCALE {
            for v in &mut self.data {
                *v /= SCALE;
            }
            *exp += SCALE_EXP;
        }
    }

    /// self^n with a running power-of-ten exponent.
    fn power(&self, n: usize) -> (Matrix, i32) {
        if n == 1 {
            return (Matrix { m: self.m, data: self.data.clone() }, 0);
        }
        let (half, e) = self.power(n / 2);
        let mut exp = 2 * e;
        let mut sq = half.mul(&half);
        if n % 2 == 1 {
            sq = self.mul(&sq);
        }
        sq.rescale(&mut exp);
        (sq, exp)
    }
}

fn matrix_cdf(n: usize, d: f64) -> f64 {
    let nd = n as f64 * d;
    let k = nd.floor() as usize + 1;
    let m = 2 * k - 1;
    let h = k as f64 - nd;
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i + 1 >= j {
                data[i * m + j] = 1.0;
            }
        }
    }
    for i in 0..m {
        data[i * m] -= h.powi(i as i32 + 1);
        data[(m - 1) * m + i] -= h.powi((m - i) as i32);
    }
    if 2.0 * h - 1.0 > 0.0 {
        data[(m - 1) * m] += (2.0 * h - 1.0).powi(m as i32);
    }
    for i in 0..m {
        for j in 0..m {
            if i + 1 > j {
                for g in 1..=(i + 1 - j) {
                    data[i * m + j] /= g as f64;
                }
            }
        }
    }
    let (q, mut exp) = Matrix { m, data }.power(n);
    let mut s = q.centre();
    for i in 1..=n {
        s = s * i as f64 / n as f64;
        if s < 1.0 / SCALE {
            s *= SCALE;
            exp -= SCALE_EXP;
        }
    }
    s * 10f64.powi(exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_bounds() {
        for n in [1, 2, 5, 20, 100, 1000] {
            assert_eq!(ks_cdf(n, 1.0), 1.0);
            assert_eq!(ks_cdf(n, 1.5), 1.0);
            assert_eq!(ks_cdf(n, 0.5 / n as f64), 0.0);
            assert_eq!(ks_cdf(n, 0.1 / n as f64), 0.0);
        }
    }

    #[test]
    fn single_observation_closed_form() {
        // D₁ = max(U, 1 − U), so P(D₁ < d) = 2d − 1 on [½, 1]
        for &d in &[0.55, 0.75, 0.9, 0.99] {
            assert!((ks_cdf(1, d) - (2.0 * d - 1.0)).abs() < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn two_observation_closed_form_by_integration() {
        // P(D₂ < d) by integrating the joint density of the order statistics
        // (2 on 0 < x < y < 1) over the acceptance region on a fine grid
        let d = 0.6;
        let grid = 4000;
        let step = 1.0 / grid as f64;
        let mut inside = 0.0;
        for i in 0..grid {
            let x = (i as f64 + 0.5) * step;
            for j in (i + 1)..grid {
                let y = (j as f64 + 0.5) * step;
                let stat = (0.5 - x).max(x).max(1.0 - y).max(y - 0.5);
                if stat < d {
                    inside += 2.0 * step * step;
                }
            }
        }
        assert!((ks_cdf(2, d) - inside).abs() < 2e-3, "{} vs {inside}", ks_cdf(2, d));
    }

    #[test]
    fn cdf_is_monotone() {
        let mut previous = 0.0;
        for i in 1..200 {
            let d = i as f64 / 200.0;
            let p = ks_cdf(37, d);
            assert!(p >= previous - 1e-12);
            previous = p;
        }
    }

    #[test]
    fn asymptotic_switch_is_continuous() {
        let n = 100;
        let d = (ASYMPTOTIC_CUTOFF / n as f64).sqrt();
        let exact = matrix_cdf(n, d * 0.999_999);
        let asym = ks_cdf(n, d * 1.000_001);
        assert!((exact - asym).abs() < 1e-6);
    }

    #[test]
    fn statistic_of_single_point() {
        assert_eq!(ks_statistic(&[0.5]), 0.5);
        assert!((ks_statistic(&[0.1, 0.2]) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn critical_value_inverts_cdf() {
        let c = ks_critical_value(50, 0.05);
        assert!((ks_cdf(50, c) - 0.95).abs() < 1e-9);
        // asymptotic 1.358/√n is close for n = 50
        assert!((c * 50f64.sqrt() - 1.358).abs() < 0.03);
    }

    #[test]
    fn approximate_critical_value_is_close() {
        for (n, alpha) in [(40, 0.05), (200, 0.05), (200, 0.01), (1000, 0.01)] {
            let exact = ks_critical_value(n, alpha);
            assert!((ks_critical_value_approx(n, alpha) / exact - 1.0).abs() < 0.01, "{n} {alpha}");
        }
    }
}
