//! Rate-distortion functions with the reproduction marginal tied to the
//! source distribution `Q`, for a distortion measure given by a
//! [`DistanceMatrix`].
//!
//! The parametric forms are
//!
//! ```text
//! R_Q(D) = -inf_{β>=0} [ βD + Σ_x q(x) ln Σ_x' q(x') e^{-β d(x,x')} ]
//! D_Q(R) =  sup_{ρ>=0} [ -ρ Σ_x q(x) ln Σ_x' q(x') e^{-d(x,x')/ρ} - ρR ]
//! ```
//!
//! and [`joint_oracle`] minimizes `I(X;X') + E d(X,X')` directly over joint
//! distributions with both marginals equal to `Q` (small alphabets only).

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{expected_distance, DistanceMatrix, InputDistribution};
use crate::error::{Error, Result};
use crate::exponents::ckm_e_from;
use crate::numeric::{ln_weighted_exp, linear_grid, sum, xlnx, CompensatedSum};
use crate::optimize::{maximize_log_range, OptResult, SearchConfig};

pub const DEFAULT_BETA_MAX: f64 = 1e6;
/// Smallest Legendre parameter on the log grid; `β = 0` is handled exactly.
const BETA_MIN: f64 = 1e-9;
/// Smallest `ρ` on the log grid of the unconstrained `D_Q(R)`.
const RHO_MIN: f64 = 1e-6;
pub const R1_TOL: f64 = 1e-6;

/// Source distribution and distortion measure.
#[derive(Debug, Clone, PartialEq)]
pub struct RdProblem {
    q: InputDistribution,
    dm: DistanceMatrix,
    pub beta_max: f64,
    pub rho_max: f64,
}

impl RdProblem {
    pub fn new(q: InputDistribution, dm: DistanceMatrix) -> Result<Self> {
        if q.len() != dm.size() {
            return Err(Error::DimensionMismatch {
                expected: dm.size(),
                got: q.len(),
            });
        }
        Ok(Self {
            q,
            dm,
            beta_max: DEFAULT_BETA_MAX,
            rho_max: crate::optimize::DEFAULT_RHO_MAX,
        })
    }

    pub fn with_rho_max(mut self, rho_max: f64) -> Self {
        self.rho_max = rho_max;
        self
    }

    pub fn input(&self) -> &InputDistribution {
        &self.q
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.dm
    }

    /// `Λ(β) = Σ_x q(x) ln Σ_x' q(x') e^{-β d(x,x')}`.
    pub fn log_mgf(&self, beta: f64) -> f64 {
        let p = self.q.probs();
        let mut acc = CompensatedSum::new();
        for (x, &qx) in p.iter().enumerate() {
            if qx > 0.0 {
                acc.add(qx * ln_weighted_exp(p, self.dm.row(x), beta));
            }
        }
        acc.value()
    }

    /// `E(ρ) = -ρ Λ(1/ρ)`, the generalized CKM function of this distortion.
    pub fn e_of_rho(&self, rho: f64) -> f64 {
        ckm_e_from(&self.dm, &self.q, rho)
    }

    /// Mean distortion and rate of the tilted test channel
    /// `W(x'|x) ∝ q(x') e^{-β d(x,x')}`, i.e. the point `(D, R_Q(D))` where
    /// the slope of `R_Q` is `-β`.
    pub fn tilted_point(&self, beta: f64) -> (f64, f64) {
        let p = self.q.probs();
        let mut dist = CompensatedSum::new();
        for (x, &qx) in p.iter().enumerate() {
            if qx == 0.0 {
                continue;
            }
            let row = self.dm.row(x);
            let ln_z = ln_weighted_exp(p, row, beta);
            for (x2, &qx2) in p.iter().enumerate() {
                let d = row[x2];
                if qx2 == 0.0 || d.is_infinite() {
                    continue;
                }
                let w = qx2 * (-beta * d - ln_z).exp();
                dist.add(qx * w * d);
            }
        }
        let d = dist.value();
        let rate = (-beta * d - self.log_mgf(beta)).max(0.0);
        (d, rate)
    }
}

fn check_nonneg(what: &str, v: f64) -> Result<()> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} = {v} < 0")))
    }
}

/// `R_Q(D)` with the optimizing Legendre parameter in `arg`.
pub fn rq_of_d_detail(prob: &RdProblem, distortion: f64) -> Result<OptResult> {
    check_nonneg("D", distortion)?;
    let cfg = SearchConfig::with_upper(prob.beta_max);
    let res = maximize_log_range(|b| -(b * distortion + prob.log_mgf(b)), BETA_MIN, &cfg)?;
    if res.diverged {
        return Err(Error::Diverged(format!(
            "R_Q(D) still increasing at beta_max = {} for D = {distortion}",
            prob.beta_max
        )));
    }
    // β = 0 contributes exactly 0.
    if res.value <= 0.0 {
        return Ok(OptResult {
            value: 0.0,
            arg: 0.0,
            at_boundary: true,
            diverged: false,
        });
    }
    Ok(res)
}

/// `R_Q(D)`, nonnegative.
pub fn rq_of_d(prob: &RdProblem, distortion: f64) -> Result<f64> {
    rq_of_d_detail(prob, distortion).map(|r| r.value)
}

/// `sup_ρ [E(ρ) - ρR]` over `ρ ∈ [0, ρ_max]`, or over `ρ ∈ [1, ρ_max]` when
/// `rho_constraint` is set.
///
/// The unconstrained form is `D_Q(R)` (never negative; `ρ* = 0` at rates
/// where the distortion floor is reached). The constrained form is the
/// expurgated exponent curve before clamping and may be negative.
pub fn dq_of_r(prob: &RdProblem, rate: f64, rho_constraint: bool) -> Result<OptResult> {
    check_nonneg("R", rate)?;
    let cfg = SearchConfig::with_upper(prob.rho_max);
    let g = |rho: f64| prob.e_of_rho(rho) - rho * rate;
    if rho_constraint {
        return maximize_log_range(g, 1.0, &cfg);
    }
    let res = maximize_log_range(g, RHO_MIN, &cfg)?;
    if res.value <= 0.0 {
        return Ok(OptResult {
            value: 0.0,
            arg: 0.0,
            at_boundary: true,
            diverged: false,
        });
    }
    Ok(res)
}

/// Smallest rate at which the `ρ >= 1` maximizer of [`dq_of_r`] is `ρ = 1`.
///
/// Bisection on `R` to [`R1_TOL`], using that `ρ*(R)` is nonincreasing. The
/// returned rate is the upper end of the final bracket, so `ρ* = 1` there.
pub fn critical_rate_r1(prob: &RdProblem) -> Result<f64> {
    critical_rate_by(|r| dq_of_r(prob, r, true).map(|o| o.arg), prob.input().len())
}

/// Shared bisection for any `R ↦ ρ*(R)` that is nonincreasing and reaches 1.
pub fn critical_rate_by<F>(mut rho_star: F, alphabet: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let at_one = |rho: f64| rho <= 1.0;
    if at_one(rho_star(0.0)?) {
        return Ok(0.0);
    }
    let cap = (alphabet as f64).ln() + 1.0;
    if !at_one(rho_star(cap)?) {
        return Err(Error::NoFiniteR1 { cap });
    }
    let (mut lo, mut hi) = (0.0, cap);
    while hi - lo > R1_TOL {
        let mid = 0.5 * (lo + hi);
        if at_one(rho_star(mid)?) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Joint distribution on `X x X`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDistribution {
    pub w: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn product(q: &InputDistribution) -> Self {
        let p = q.probs();
        Self {
            w: p.iter().map(|&a| p.iter().map(|&b| a * b).collect()).collect(),
        }
    }

    /// `I(X;X')` in nats, `0 ln 0 = 0`.
    pub fn mutual_information(&self) -> f64 {
        let rows: Vec<f64> = self.w.iter().map(|r| sum(r.iter().copied())).collect();
        let k = self.w.len();
        let cols: Vec<f64> = (0..k).map(|j| sum(self.w.iter().map(|r| r[j]))).collect();
        let mut acc = CompensatedSum::new();
        for (i, row) in self.w.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > 0.0 {
                    acc.add(v * (v / (rows[i] * cols[j])).ln());
                }
            }
        }
        acc.value().max(0.0)
    }

    /// `E d(X,X')`; `+inf` if an infinite distance has positive mass.
    pub fn expected(&self, dm: &DistanceMatrix) -> f64 {
        let mut acc = CompensatedSum::new();
        for (i, row) in self.w.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > 0.0 {
                    let d = dm.get(i, j);
                    if d.is_infinite() {
                        return f64::INFINITY;
                    }
                    acc.add(v * d);
                }
            }
        }
        acc.value()
    }

    /// Both marginals equal `q` within `tol`, entries nonnegative.
    pub fn has_marginals(&self, q: &InputDistribution, tol: f64) -> bool {
        let p = q.probs();
        let k = p.len();
        self.w.len() == k
            && self.w.iter().flatten().all(|&v| v >= 0.0)
            && (0..k).all(|i| (sum(self.w[i].iter().copied()) - p[i]).abs() <= tol)
            && (0..k).all(|j| (sum(self.w.iter().map(|r| r[j])) - p[j]).abs() <= tol)
    }

    /// Membership in `{Q̂ : both marginals Q, I(X;X') <= R}`.
    pub fn in_admissible_set(&self, q: &InputDistribution, rate: f64, tol: f64) -> bool {
        self.has_marginals(q, tol) && self.mutual_information() <= rate + tol
    }
}

/// Objective evaluator over the free coordinates of the marginal-fixed
/// polytope. The free entries are `J[i][j]` for `i, j < k-1`; the last row and
/// column are fixed by the marginals.
struct Polytope<'a> {
    q: &'a [f64],
    ln_qq: Vec<f64>,
    d: &'a DistanceMatrix,
    k: usize,
}

impl<'a> Polytope<'a> {
    fn new(q: &'a [f64], d: &'a DistanceMatrix) -> Self {
        let k = q.len();
        let ln_qq = (0..k * k).map(|t| (q[t / k] * q[t % k]).ln()).collect();
        Self { q, ln_qq, d, k }
    }

    fn complete(&self, free: &[f64]) -> Option<Vec<f64>> {
        let k = self.k;
        let m = k - 1;
        let mut j = vec![0.0; k * k];
        for a in 0..m {
            for b in 0..m {
                j[a * k + b] = free[a * m + b];
            }
        }
        for a in 0..m {
            let row: f64 = (0..m).map(|b| j[a * k + b]).sum();
            j[a * k + m] = self.q[a] - row;
        }
        for b in 0..k {
            let col: f64 = (0..m).map(|a| j[a * k + b]).sum();
            j[m * k + b] = self.q[b] - col;
        }
        // Entries a hair below zero are rounding from the marginal algebra.
        for v in j.iter_mut() {
            if *v < -1e-14 {
                return None;
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Some(j)
    }

    /// `(I, I + E d)` of a completed joint.
    fn evaluate(&self, j: &[f64]) -> (f64, f64) {
        let mut info = 0.0;
        let mut dist = 0.0;
        for (t, &v) in j.iter().enumerate() {
            if v > 0.0 {
                info += xlnx(v) - v * self.ln_qq[t];
                let d = self.d.entries()[t];
                if d.is_infinite() {
                    return (info.max(0.0), f64::INFINITY);
                }
                dist += v * d;
            }
        }
        let info = info.max(0.0);
        (info, info + dist)
    }

    fn score(&self, free: &[f64], rate: f64) -> Option<f64> {
        let j = self.complete(free)?;
        let (info, obj) = self.evaluate(&j);
        (info <= rate + 1e-12).then_some(obj)
    }

    fn upper(&self, a: usize, b: usize) -> f64 {
        self.q[a].min(self.q[b])
    }
}

/// Brute-force `min [I(X;X') + E d(X,X')]` over joints with both marginals
/// `Q` and `I(X;X') <= R`, for `|X| <= 3`.
///
/// The `(|X|-1)^2` free coordinates are scanned on `grid` points each, then
/// refined by a shrinking compass search. The product joint (`I = 0`) is
/// always a candidate. `R` is not subtracted.
pub fn joint_oracle(prob: &RdProblem, rate: f64, grid: usize) -> Result<(f64, JointDistribution)> {
    check_nonneg("R", rate)?;
    let q = prob.input().probs();
    let k = q.len();
    if k > 3 {
        return Err(Error::AlphabetTooLarge(k));
    }
    if grid < 100 {
        return Err(Error::InvalidParameter(format!("oracle grid {grid} < 100")));
    }
    let poly = Polytope::new(q, prob.distances());
    let m = k - 1;
    let axes: Vec<Vec<f64>> = (0..m * m)
        .map(|t| linear_grid(0.0, poly.upper(t / m, t % m), grid))
        .collect();

    let product = JointDistribution::product(prob.input());
    let mut best_val = poly.evaluate(&product.w.concat()).1;
    let mut best_free: Vec<f64> = (0..m * m).map(|t| q[t / m] * q[t % m]).collect();

    let scan = match m {
        1 => axes[0]
            .par_iter()
            .filter_map(|&a| poly.score(&[a], rate).map(|v| (v, vec![a])))
            .min_by(|x, y| x.0.total_cmp(&y.0)),
        _ => axes[0]
            .par_iter()
            .filter_map(|&a| {
                let mut local: Option<(f64, Vec<f64>)> = None;
                let mut free = [a, 0.0, 0.0, 0.0];
                for &b in &axes[1] {
                    if a + b > q[0] + 1e-15 {
                        break;
                    }
                    free[1] = b;
                    for &c in &axes[2] {
                        if a + c > q[0] + 1e-15 {
                            break;
                        }
                        free[2] = c;
                        for &e in &axes[3] {
                            if b + e > q[1] + 1e-15 || c + e > q[1] + 1e-15 {
                                break;
                            }
                            free[3] = e;
                            if let Some(v) = poly.score(&free, rate) {
                                if local.as_ref().is_none_or(|l| v < l.0) {
                                    local = Some((v, free.to_vec()));
                                }
                            }
                        }
                    }
                }
                local
            })
            .min_by(|x, y| x.0.total_cmp(&y.0)),
    };
    if let Some((v, free)) = scan {
        if v < best_val {
            best_val = v;
            best_free = free;
        }
    }

    // Compass search around the best grid point.
    let mut step = axes
        .iter()
        .map(|a| a[1] - a[0])
        .fold(0.0f64, f64::max);
    while step > 1e-13 {
        let mut improved = false;
        for t in 0..best_free.len() {
            for dir in [-1.0, 1.0] {
                let mut cand = best_free.clone();
                cand[t] += dir * step;
                if cand[t] < 0.0 {
                    continue;
                }
                if let Some(v) = poly.score(&cand, rate) {
                    if v < best_val {
                        best_val = v;
                        best_free = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    let j = poly
        .complete(&best_free)
        .expect("best point is feasible by construction");
    let witness = JointDistribution {
        w: j.chunks(k).map(<[f64]>::to_vec).collect(),
    };
    Ok((best_val, witness))
}

/// `inf_{Q̂ ∈ A(R,Q)} [I + E d] - R` assembled from the parametric pieces:
/// `D_Q(R) + R` below the critical rate, `D_Q(R_1) + R_1` above it.
pub fn piecewise_objective(prob: &RdProblem, rate: f64, r1: f64) -> Result<f64> {
    if rate <= r1 {
        Ok(dq_of_r(prob, rate, false)?.value + rate)
    } else {
        Ok(dq_of_r(prob, r1, false)?.value + r1)
    }
}

/// Zero-rate exponent `Σ q q d` for convenience.
pub fn zero_rate_value(prob: &RdProblem) -> Result<f64> {
    expected_distance(prob.distances(), prob.input())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Channel;
    use crate::testutil::{example_one, random_channel};
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn problem(ch: &Channel, q: &InputDistribution, s: f64) -> RdProblem {
        RdProblem::new(q.clone(), ch.chernoff_distances(s).unwrap()).unwrap()
    }

    fn bsc_problem() -> RdProblem {
        problem(&Channel::bsc(0.1).unwrap(), &InputDistribution::uniform(2), 0.5)
    }

    #[test]
    fn rq_zero_above_mean_distortion() {
        let prob = bsc_problem();
        let ed = zero_rate_value(&prob).unwrap();
        assert_eq!(rq_of_d(&prob, ed).unwrap(), 0.0);
        assert_eq!(rq_of_d(&prob, ed + 0.1).unwrap(), 0.0);
        assert!(rq_of_d(&prob, 0.5 * ed).unwrap() > 0.0);
    }

    #[test]
    fn equal_rows_rate_is_zero() {
        let ch = Channel::new(vec![vec![0.25, 0.75]; 2]).unwrap();
        let prob = problem(&ch, &InputDistribution::binary(0.3).unwrap(), 0.5);
        for &d in &[1e-3, 0.1, 1.0] {
            assert_eq!(rq_of_d(&prob, d).unwrap(), 0.0);
        }
        assert_eq!(critical_rate_r1(&prob).unwrap(), 0.0);
    }

    #[test]
    fn rq_bsc_matches_oracle() {
        // For the BSC with uniform input the tilted channel keeps the uniform
        // output marginal, so the parametric and direct forms coincide.
        let prob = bsc_problem();
        let dist = 0.1;
        let rq = rq_of_d(&prob, dist).unwrap();
        // Direct: min I over symmetric joints [[a, 1/2-a],[1/2-a, a]] with E d <= D.
        let db = prob.distances().get(0, 1);
        let mut best = f64::INFINITY;
        for i in 0..=200_000 {
            let off = 0.5 * i as f64 / 200_000.0;
            if 2.0 * off * db > dist + 1e-15 {
                break;
            }
            let on = 0.5 - off;
            let info = 2.0 * (xlnx(on) + xlnx(off)) + 4f64.ln();
            best = best.min(info);
        }
        assert!((rq - best).abs() < 1e-5, "{rq} vs {best}");
    }

    #[test]
    fn dq_high_rate_floor() {
        let prob = bsc_problem();
        let r = dq_of_r(&prob, 10.0 * 2f64.ln(), false).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.arg, 0.0);
    }

    #[test]
    fn dq_example_one_linear_region() {
        let inputs = example_one();
        let prob = RdProblem::new(inputs.input().clone(), (*inputs.distances(0.5).unwrap()).clone()).unwrap();
        let r1 = critical_rate_r1(&prob).unwrap();
        let rate = r1 + 0.01;
        let r = dq_of_r(&prob, rate, true).unwrap();
        assert_eq!(r.arg, 1.0);
        assert!((r.value - (0.0574 - rate)).abs() < 5e-4);
        assert!((r.value - (inputs.ckm_e(1.0, 0.5).unwrap() - rate)).abs() < 1e-15);
    }

    #[test]
    fn identity_channel_diverges_below_entropy() {
        let ch = Channel::identity(2).unwrap();
        let prob = problem(&ch, &InputDistribution::uniform(2), 0.5);
        let r = dq_of_r(&prob, 0.5, true).unwrap();
        assert!(r.diverged);
        let above = dq_of_r(&prob, 0.8, true).unwrap();
        assert!(!above.diverged);
        assert_eq!(above.arg, 1.0);
    }

    #[test]
    fn r1_is_tangency_point() {
        let inputs = example_one();
        let prob = RdProblem::new(inputs.input().clone(), (*inputs.distances(0.5).unwrap()).clone()).unwrap();
        let r1 = critical_rate_r1(&prob).unwrap();
        assert!(r1 > 0.0);
        // Independent route: ρ* = 1 exactly when E'(1) <= R, so R_1 = E'(1).
        let h = 1e-6;
        let slope = (prob.e_of_rho(1.0 + h) - prob.e_of_rho(1.0 - h)) / (2.0 * h);
        assert!((r1 - slope).abs() < 2e-6, "R1 {r1} vs E'(1) {slope}");
        // Curve meets D_Q there, with slope -1 to the right.
        let curve_at = dq_of_r(&prob, r1, true).unwrap().value;
        let dq = dq_of_r(&prob, r1, false).unwrap().value;
        assert!((curve_at - dq).abs() < 1e-6, "{curve_at} vs {dq}");
        let right = (dq_of_r(&prob, r1 + 1e-4, true).unwrap().value - curve_at) / 1e-4;
        assert!((right + 1.0).abs() < 1e-3);
    }

    #[test]
    fn r1_bsc_matches_oracle_minimizer() {
        let prob = bsc_problem();
        let r1 = critical_rate_r1(&prob).unwrap();
        let (_, witness) = joint_oracle(&prob, 10.0, 4000).unwrap();
        assert!((witness.mutual_information() - r1).abs() < 1e-4);
    }

    #[test]
    fn oracle_zero_rate_is_product() {
        let prob = bsc_problem();
        let (v, w) = joint_oracle(&prob, 0.0, 100).unwrap();
        let z = zero_rate_value(&prob).unwrap();
        // The 1e-12 slack on I admits joints about 1e-6 away from the product.
        assert!(v <= z && z - v < 1e-6, "{v} vs {z}");
        assert!(w.mutual_information() <= 2e-12);
        assert!(w.has_marginals(prob.input(), 1e-12));
    }

    #[test]
    fn oracle_equal_rows() {
        let ch = Channel::new(vec![vec![0.6, 0.4]; 2]).unwrap();
        let prob = problem(&ch, &InputDistribution::binary(0.2).unwrap(), 0.5);
        let (v, w) = joint_oracle(&prob, 1.0, 200).unwrap();
        assert!(v.abs() < 1e-12);
        assert!(w.mutual_information() < 1e-9);
    }

    #[test]
    fn oracle_one_parameter_family() {
        // Unconstrained rate: scan the single free entry of the 2x2 polytope.
        let ch = Channel::new(vec![vec![0.7, 0.3], vec![0.2, 0.8]]).unwrap();
        let q = InputDistribution::binary(0.35).unwrap();
        let prob = problem(&ch, &q, 0.5);
        let (v, w) = joint_oracle(&prob, 2f64.ln(), 200).unwrap();
        assert!(w.has_marginals(&q, 1e-12));
        let (q0, q1) = (0.65, 0.35);
        let d = prob.distances();
        let mut best = f64::INFINITY;
        for i in 0..=1_000_000 {
            let a = q1 * i as f64 / 1_000_000.0; // J11
            let j = [q0 - q1 + a, q1 - a, q1 - a, a];
            let info: f64 = j
                .iter()
                .zip([q0 * q0, q0 * q1, q1 * q0, q1 * q1])
                .map(|(&v, pp)| if v > 0.0 { v * (v / pp).ln() } else { 0.0 })
                .sum();
            let ed = (j[1] + j[2]) * d.get(0, 1);
            best = best.min(info + ed);
        }
        assert!((v - best).abs() < 1e-9, "{v} vs {best}");
    }

    #[test]
    fn oracle_rejects_large_alphabet() {
        let ch = Channel::identity(4).unwrap();
        let prob = problem(&ch, &InputDistribution::uniform(4), 0.5);
        assert!(matches!(joint_oracle(&prob, 0.1, 100), Err(Error::AlphabetTooLarge(4))));
        let small = bsc_problem();
        assert!(joint_oracle(&small, 0.1, 50).is_err());
    }

    #[test]
    fn oracle_three_letters_respects_constraints() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let ch = random_channel(&mut rng, 3, 3);
        let q = InputDistribution::new(vec![0.5, 0.3, 0.2]).unwrap();
        let prob = problem(&ch, &q, 0.5);
        let rate = 0.05;
        let (v, w) = joint_oracle(&prob, rate, 100).unwrap();
        assert!(w.in_admissible_set(&q, rate, 1e-9));
        assert!(v <= zero_rate_value(&prob).unwrap() + 1e-15);
        // The parametric route relaxes the output-marginal constraint, so it
        // can only come out lower.
        let r1 = critical_rate_r1(&prob).unwrap();
        let param = piecewise_objective(&prob, rate, r1).unwrap();
        assert!(param <= v + 1e-6, "parametric {param} > oracle {v}");
    }

    #[test]
    fn symmetric_instances_agree_with_oracle() {
        for eps in [0.02, 0.1, 0.25] {
            let prob = problem(&Channel::bsc(eps).unwrap(), &InputDistribution::uniform(2), 0.5);
            let r1 = critical_rate_r1(&prob).unwrap();
            for i in 0..=10 {
                let rate = 0.06 * i as f64;
                let param = piecewise_objective(&prob, rate, r1).unwrap();
                let (oracle, _) = joint_oracle(&prob, rate, 2000).unwrap();
                assert!((param - oracle).abs() < 2e-3, "eps {eps} R {rate}: {param} vs {oracle}");
            }
        }
    }

    #[test]
    fn tilted_point_lies_on_rq() {
        let prob = bsc_problem();
        for &beta in &[0.5, 2.0, 8.0] {
            let (d, r) = prob.tilted_point(beta);
            assert!((rq_of_d(&prob, d).unwrap() - r).abs() < 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn legendre_round_trip(seed in any::<u64>(), k in 2usize..=3, frac in 0.1f64..0.9) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let ch = crate::testutil::random_full_support_channel(&mut rng, k, 3);
            let q = crate::testutil::random_distribution(&mut rng, k);
            let prob = problem(&ch, &q, 0.5);
            // Strictly convex region: rates strictly between 0 and R_Q(0+).
            let r_top = rq_of_d(&prob, 1e-9).unwrap();
            let rate = frac * r_top;
            let d = dq_of_r(&prob, rate, false).unwrap();
            prop_assume!(d.value > 1e-6);
            let back = rq_of_d(&prob, d.value).unwrap();
            prop_assert!((back - rate).abs() < 1e-6, "R {rate} -> D {} -> R {back}", d.value);
        }

        #[test]
        fn dq_convex_nonincreasing_and_rho_monotone(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let ch = crate::testutil::random_full_support_channel(&mut rng, 3, 3);
            let q = crate::testutil::random_distribution(&mut rng, 3);
            let prob = problem(&ch, &q, 0.5);
            let top = q.entropy();
            let rates: Vec<f64> = (0..=30).map(|i| top * i as f64 / 30.0).collect();
            let res: Vec<OptResult> = rates.iter().map(|&r| dq_of_r(&prob, r, false).unwrap()).collect();
            for w in res.windows(2) {
                prop_assert!(w[1].value <= w[0].value + 1e-10);
                prop_assert!(w[1].arg <= w[0].arg * (1.0 + 1e-6) + 1e-9);
            }
            for w in res.windows(3) {
                prop_assert!(w[0].value + w[2].value - 2.0 * w[1].value >= -1e-9);
            }
        }
    }
}
