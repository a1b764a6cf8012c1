//! Desk-scale checks of the ensemble picture behind the bounds.
//!
//! A type enumerator `N` counts the other codewords whose joint type with a
//! given codeword has exponent `I`; it is `Binomial(M - 1, e^{-nI})` with
//! `M = e^{nR}` codewords. Its fractional moment behaves as
//!
//! ```text
//! (1/n) ln E[N^{1/ρ}] → R - I        if R < I   (rare events)
//!                     → (R - I)/ρ    if R >= I  (concentration)
//! ```
//!
//! The continuous-alphabet part quantizes a pairwise distance rate function
//! `R(D)` on levels `kδ` and evaluates the two exponent branches on them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::curves::extended;
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, CompensatedSum};

/// Largest `M` summed exactly.
pub const EXACT_MAX_CODEWORDS: f64 = 1_048_576.0;
pub const MIN_TRIALS: usize = 10_000;
/// Moments below this are flagged as underflowing.
pub const UNDERFLOW_LIMIT: f64 = 1e-300;
/// Largest `M` accepted at all (the Monte Carlo sampler takes `u64` counts).
const MAX_CODEWORDS: f64 = 1e18;
/// Trials per independently seeded Monte Carlo chunk.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnumeratorModel {
    pub n: usize,
    /// Rate in nats per symbol.
    pub rate: f64,
    /// Pairwise type exponent `I` in nats per symbol.
    pub type_exponent: f64,
    pub rho: f64,
}

impl EnumeratorModel {
    pub fn new(n: usize, rate: f64, type_exponent: f64, rho: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("blocklength n = 0".into()));
        }
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("rate = {rate}")));
        }
        if !(type_exponent >= 0.0 && type_exponent.is_finite()) {
            return Err(Error::InvalidParameter(format!("type exponent = {type_exponent}")));
        }
        if !(rho >= 1.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho = {rho} < 1")));
        }
        let m = Self { n, rate, type_exponent, rho };
        let codewords = m.codewords();
        if !(codewords <= MAX_CODEWORDS) {
            return Err(Error::InvalidParameter(format!(
                "M = round(e^(nR)) = {codewords} exceeds {MAX_CODEWORDS}"
            )));
        }
        if codewords < 2.0 {
            return Err(Error::InvalidParameter(format!(
                "M = round(e^(nR)) = {codewords} < 2"
            )));
        }
        Ok(m)
    }

    /// `M = round(e^{nR})`.
    pub fn codewords(&self) -> f64 {
        (self.n as f64 * self.rate).exp().round()
    }

    /// Rate actually realized by the `M - 1` competitors, `ln(M-1)/n`.
    pub fn realized_rate(&self) -> f64 {
        (self.codewords() - 1.0).ln() / self.n as f64
    }

    /// `ln p` with `p = e^{-nI}`.
    fn ln_p(&self) -> f64 {
        -(self.n as f64) * self.type_exponent
    }
}

/// Two-branch exponent at rate `rate`.
pub fn moment_exponent_at(rate: f64, type_exponent: f64, rho: f64) -> f64 {
    let diff = rate - type_exponent;
    if diff < 0.0 {
        diff
    } else {
        diff / rho
    }
}

/// Theoretical exponent of `E[N^{1/ρ}]` at the nominal rate.
pub fn moment_exponent_theory(m: &EnumeratorModel) -> f64 {
    moment_exponent_at(m.rate, m.type_exponent, m.rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMode {
    ExactBinomial,
    MonteCarlo,
}

/// Empirical moment with the side quantities needed for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    /// `(1/n) ln E[N^{1/ρ}]`.
    #[serde(serialize_with = "extended")]
    pub exponent: f64,
    /// `ln E[N^{1/ρ}]`.
    #[serde(serialize_with = "extended")]
    pub ln_moment: f64,
    /// `ln E[N]`, for the Jensen check `E[N^{1/ρ}] <= E[N]^{1/ρ}`.
    #[serde(serialize_with = "extended")]
    pub ln_mean: f64,
    pub underflow: bool,
}

/// `ln P(N = k)` for `N ~ Binomial(m, p)`.
fn ln_binomial_pmf(m: f64, k: f64, ln_p: f64, ln_q: f64) -> f64 {
    ln_gamma(m + 1.0) - ln_gamma(k + 1.0) - ln_gamma(m - k + 1.0) + k * ln_p + (m - k) * ln_q
}

/// `ln P(N = k)` for `k = 0..=m`: log-gamma at the mode, then the ratio
/// recursion `P(k)/P(k-1) = (m-k+1)p / (kq)` outward with compensated sums, so
/// all terms share one anchor error.
fn ln_binomial_pmf_table(m: usize, ln_p: f64, ln_q: f64) -> Vec<f64> {
    let mf = m as f64;
    let mode = (((mf + 1.0) * ln_p.exp()).floor() as usize).min(m);
    let mut table = vec![0.0; m + 1];
    table[mode] = ln_binomial_pmf(mf, mode as f64, ln_p, ln_q);
    let step = |k: usize| ((mf - k as f64 + 1.0) / k as f64).ln() + ln_p - ln_q;
    let mut acc = CompensatedSum::new();
    acc.add(table[mode]);
    for (k, slot) in table.iter_mut().enumerate().skip(mode + 1) {
        acc.add(step(k));
        *slot = acc.value();
    }
    let mut acc = CompensatedSum::new();
    acc.add(table[mode]);
    for k in (0..mode).rev() {
        acc.add(-step(k + 1));
        table[k] = acc.value();
    }
    table
}

fn exact_moment(m: &EnumeratorModel) -> Result<(f64, f64)> {
    let codewords = m.codewords();
    if codewords > EXACT_MAX_CODEWORDS {
        return Err(Error::TooManyCodewords(codewords));
    }
    let trials = codewords - 1.0;
    let ln_p = m.ln_p();
    let ln_q = (-ln_p.exp()).ln_1p();
    let inv_rho = 1.0 / m.rho;
    let count = trials as usize;
    let ln_pmf = ln_binomial_pmf_table(count, ln_p, ln_q);
    // Dividing by the summed pmf cancels the rounding of the log-gamma anchor,
    // which matters when comparing with the closed-form mean.
    let ln_total = log_sum_exp(ln_pmf.iter().copied());
    let weighted = ln_pmf
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &l)| inv_rho * (k as f64).ln() + l);
    let ln_moment = log_sum_exp(weighted) - ln_total;
    let ln_mean = trials.ln() + ln_p;
    Ok((ln_moment, ln_mean))
}

fn monte_carlo_moment(m: &EnumeratorModel, trials: usize, seed: u64) -> Result<(f64, f64)> {
    if trials < MIN_TRIALS {
        return Err(Error::TooFewTrials(trials));
    }
    let count = (m.codewords() - 1.0) as u64;
    let p = m.ln_p().exp();
    let sampler = Binomial::new(count, p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let inv_rho = 1.0 / m.rho;
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(trials - c * CHUNK);
            let mut acc = CompensatedSum::new();
            for _ in 0..len {
                let k = sampler.sample(&mut rng);
                if k > 0 {
                    acc.add((k as f64).powf(inv_rho));
                }
            }
            acc.value()
        })
        .collect();
    let total: CompensatedSum = partial.into_iter().collect();
    let ln_moment = (total.value() / trials as f64).ln();
    let ln_mean = (count as f64).ln() + m.ln_p();
    Ok((ln_moment, ln_mean))
}

/// `(1/n) ln E[N^{1/ρ}]` by exact log-domain summation over the binomial pmf
/// (`M <= 2^20`) or by seeded Monte Carlo (`trials >= 10^4`).
pub fn moment_exponent_empirical(
    m: &EnumeratorModel,
    mode: MomentMode,
    trials: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    let (ln_moment, ln_mean) = match mode {
        MomentMode::ExactBinomial => exact_moment(m)?,
        MomentMode::MonteCarlo => monte_carlo_moment(m, trials, seed)?,
    };
    Ok(MomentEstimate {
        exponent: ln_moment / m.n as f64,
        ln_moment,
        ln_mean,
        underflow: ln_moment < UNDERFLOW_LIMIT.ln(),
    })
}

/// JSON report of one moment run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub model: EnumeratorModel,
    pub codewords: f64,
    pub realized_rate: f64,
    /// Theory at the realized rate, the one the finite ensemble has.
    pub theory_exponent: f64,
    #[serde(serialize_with = "extended")]
    pub empirical_exponent: f64,
    #[serde(serialize_with = "extended")]
    pub gap: f64,
    pub mode: MomentMode,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub underflow: bool,
}

/// Runs the empirical moment and compares it with the two-branch theory.
pub fn moment_report(m: &EnumeratorModel, mode: MomentMode, trials: usize, seed: u64) -> Result<MomentReport> {
    let est = moment_exponent_empirical(m, mode, trials, seed)?;
    let realized = m.realized_rate();
    let theory = moment_exponent_at(realized, m.type_exponent, m.rho);
    let mc = mode == MomentMode::MonteCarlo;
    Ok(MomentReport {
        model: *m,
        codewords: m.codewords(),
        realized_rate: realized,
        theory_exponent: theory,
        empirical_exponent: est.exponent,
        gap: (est.exponent - theory).abs(),
        mode,
        seed: mc.then_some(seed),
        trials: mc.then_some(trials),
        underflow: est.underflow,
    })
}

type Evaluator = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Distance rate function `D ↦ R(D)` on `[lo, hi]`, sampled on levels `kδ`.
pub struct RateFunction {
    evaluator: Evaluator,
    domain: (f64, f64),
    delta: f64,
    d_max: f64,
}

impl std::fmt::Debug for RateFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RateFunction")
            .field("domain", &self.domain)
            .field("delta", &self.delta)
            .field("d_max", &self.d_max)
            .finish_non_exhaustive()
    }
}

/// Samples used by the shape check.
const SHAPE_SAMPLES: usize = 257;
/// Rate treated as zero when picking the default cap.
const ZERO_RATE: f64 = 1e-9;

impl RateFunction {
    /// Validates the shape and sets `D_max` to the smallest level with
    /// `R(kδ) <= 1e-9`, plus one `δ` (or the domain end if there is none).
    pub fn new<F>(evaluator: F, domain: (f64, f64), delta: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let (lo, hi) = domain;
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!("rate function domain [{lo}, {hi}]")));
        }
        if !(delta > 0.0 && delta < hi - lo) {
            return Err(Error::InvalidParameter(format!("quantization step {delta}")));
        }
        check_shape(&evaluator, lo, hi)?;
        let k_lo = (lo / delta).ceil() as usize;
        let k_hi = (hi / delta).floor() as usize;
        let d_max = (k_lo..=k_hi)
            .map(|k| k as f64 * delta)
            .find(|&d| evaluator(d) <= ZERO_RATE)
            .map_or(hi, |d| (d + delta).min(hi));
        Ok(Self {
            evaluator: Box::new(evaluator),
            domain,
            delta,
            d_max,
        })
    }

    /// Overrides the distance cap.
    pub fn with_d_max(mut self, d_max: f64) -> Result<Self> {
        if !(d_max > self.domain.0) {
            return Err(Error::InvalidParameter(format!("D_max = {d_max}")));
        }
        self.d_max = d_max.min(self.domain.1);
        Ok(self)
    }

    pub fn eval(&self, d: f64) -> f64 {
        (self.evaluator)(d)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    /// Levels `kδ` for `k = 0..=ceil(D_max/δ)` that fall in the domain, with
    /// their rates.
    pub fn levels(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let last = (self.d_max / self.delta).ceil() as usize;
        (0..=last)
            .map(move |k| k as f64 * self.delta)
            .filter(move |&d| d >= self.domain.0 && d <= self.domain.1)
            .map(move |d| (d, self.eval(d)))
    }
}

/// Nonincreasing and convex where finite, on a uniform sample.
fn check_shape<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<()> {
    let step = (hi - lo) / (SHAPE_SAMPLES - 1) as f64;
    let xs: Vec<f64> = (0..SHAPE_SAMPLES).map(|i| lo + step * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    for (i, &y) in ys.iter().enumerate() {
        if y.is_nan() || y < 0.0 || y == f64::NEG_INFINITY {
            return Err(Error::InvalidRateFunction { at: xs[i] });
        }
    }
    let slack = |a: f64, b: f64| 1e-9 * (1.0 + a.abs().max(b.abs()));
    for i in 1..ys.len() {
        let (a, b) = (ys[i - 1], ys[i]);
        if a.is_finite() && b.is_finite() && b > a + slack(a, b) {
            return Err(Error::InvalidRateFunction { at: xs[i] });
        }
    }
    for i in 1..ys.len() - 1 {
        let (a, b, c) = (ys[i - 1], ys[i], ys[i + 1]);
        if a.is_finite() && b.is_finite() && c.is_finite() && a + c - 2.0 * b < -slack(a, c) {
            return Err(Error::InvalidRateFunction { at: xs[i] });
        }
    }
    Ok(())
}

/// Quantized exponent branches at rate `rate`:
///
/// ```text
/// E1 = inf_{k: R(kδ) >= R} [kδ + ρR(kδ)] - ρR
/// E2 = inf_{k: R(kδ) <= R} [kδ + R(kδ)] - R
/// ```
///
/// An empty branch is `+inf`. `E2` is not clamped.
pub fn quantized_exponents(rf: &RateFunction, rate: f64, rho: f64) -> Result<(f64, f64)> {
    if !(rate >= 0.0) {
        return Err(Error::InvalidParameter(format!("rate = {rate}")));
    }
    if !(rho >= 1.0) {
        return Err(Error::InvalidParameter(format!("rho = {rho} < 1")));
    }
    let mut e1 = f64::INFINITY;
    let mut e2 = f64::INFINITY;
    for (d, r) in rf.levels() {
        if r.is_infinite() {
            continue;
        }
        if r >= rate {
            e1 = e1.min(d + rho * (r - rate));
        }
        if r <= rate {
            e2 = e2.min(d + r - rate);
        }
    }
    Ok((e1, e2))
}

/// `max(0, min(E1, E2))`, the quantized exponent.
pub fn quantized_exponent(rf: &RateFunction, rate: f64, rho: f64) -> Result<f64> {
    let (e1, e2) = quantized_exponents(rf, rate, rho)?;
    Ok(e1.min(e2).max(0.0))
}
