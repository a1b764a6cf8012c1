//! Small numerical helpers shared by the exponent code.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn sum(iter: impl IntoIterator<Item = f64>) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `ln Σ exp(a_i)`; `-inf` entries are skipped, empty input gives `-inf`.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values
        .clone()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s = sum(values
        .into_iter()
        .filter(|v| *v > f64::NEG_INFINITY)
        .map(|v| (v - max).exp()));
    max + s.ln()
}

/// `ln Σ_i w_i exp(-t d_i)` for a probability vector `w` and distances in
/// `[0, +inf]`.
///
/// `t = 0` counts every term as `w_i` (including infinite distances). When the
/// mixture is close to one the logarithm is taken through `ln_1p` of the
/// `expm1` deficits, which keeps `ρ·ln(·)` accurate for large `ρ = 1/t`. The
/// weights are taken to sum to exactly one there, so zero distances give
/// exactly zero instead of the rounding error of the weights.
pub fn ln_weighted_exp(weights: &[f64], dist: &[f64], t: f64) -> f64 {
    debug_assert_eq!(weights.len(), dist.len());
    let term = |w: f64, d: f64| -> f64 {
        if w == 0.0 {
            0.0
        } else if t == 0.0 {
            w
        } else {
            w * (-t * d).exp()
        }
    };
    let direct = sum(weights.iter().zip(dist).map(|(&w, &d)| term(w, d)));
    if direct <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if direct < 0.5 || t == 0.0 {
        return direct.ln();
    }
    let mut acc = CompensatedSum::new();
    for (&w, &d) in weights.iter().zip(dist) {
        if w == 0.0 {
            continue;
        }
        acc.add(w * (-t * d).exp_m1());
    }
    acc.value().ln_1p()
}

/// `x ln x` with the `0 ln 0 = 0` convention.
pub fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Log-spaced grid of `n` points covering `[lo, hi]` inclusive, `0 < lo <= hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// Evenly spaced grid of `n` points covering `[lo, hi]` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let mut g: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    g[n - 1] = hi;
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut v = vec![1.0];
        v.extend(std::iter::repeat_n(1e-16, 10_000));
        v.push(-1.0);
        assert!((sum(v) - 1e-12).abs() < 1e-20);
    }

    #[test]
    fn log_sum_exp_handles_neg_infinity() {
        let v = [f64::NEG_INFINITY, 0.0, 0.0];
        assert!((log_sum_exp(v) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY]), f64::NEG_INFINITY);
        let big = [1000.0, 1000.0];
        assert!((log_sum_exp(big) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn ln_weighted_exp_matches_direct_form() {
        let w = [0.3, 0.7];
        let d = [0.0, 2.0];
        for &t in &[1e-6, 0.01, 1.0, 10.0] {
            let direct = (0.3 + 0.7 * (-t * 2.0f64).exp()).ln();
            assert!((ln_weighted_exp(&w, &d, t) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn ln_weighted_exp_infinite_distance() {
        let w = [0.5, 0.5];
        let d = [0.0, f64::INFINITY];
        assert!((ln_weighted_exp(&w, &d, 1.0) - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(ln_weighted_exp(&w, &d, 0.0), 0.0);
        assert_eq!(ln_weighted_exp(&[0.0, 1.0], &[0.0, f64::INFINITY], 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn grids_hit_endpoints() {
        let g = log_grid(1.0, 1e4, 64);
        assert_eq!(g.len(), 64);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[63], 1e4);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let l = linear_grid(0.0, 1.0, 33);
        assert_eq!(l[16], 0.5);
    }
}
