//! Exponent-versus-rate curves for the three expurgated bounds:
//!
//! * Gallager: `sup_{ρ>=1} [E_G(ρ,1/2,Q) - ρR]`
//! * CKM (Bhattacharyya): `sup_{ρ>=1} [E(ρ,1/2,Q) - ρR]`
//! * Chernoff-improved: `sup_{ρ>=1} sup_{0<=s<=1} [E(ρ,s,Q) - ρR]`
//!
//! Each curve is curvy below its critical rate `R_1` (glassy phase), a line
//! of slope -1 between `R_1` and `R_1 + value(R_1)` (paramagnetic phase) and
//! zero beyond.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exponents::{ckm_e_from, gallager_eg_from, ExponentInputs};
use crate::numeric::linear_grid;
use crate::optimize::{maximize_concave, maximize_log_range, OptResult, SearchConfig, DEFAULT_TOL};
use crate::rate_distortion::{critical_rate_by, dq_of_r, RdProblem};

/// Number of points of the default rate grid.
pub const DEFAULT_POINTS: usize = 201;
/// Points of the coarse `s` scan that precedes the golden section.
pub const S_GRID_POINTS: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Gallager,
    CkmBhatt,
    ChernoffNew,
    Gaussian,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::Gallager => "gallager",
            CurveKind::CkmBhatt => "ckm_bhatt",
            CurveKind::ChernoffNew => "chernoff_new",
            CurveKind::Gaussian => "gaussian",
        }
    }
}

/// Random-energy-model reading of a curve segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Curvy part, `R < R_1`: a subexponential number of codewords dominates.
    Glassy,
    /// Straight line of slope -1, `R_1 <= R < R_1 + value(R_1)`.
    Paramagnetic,
    /// Exponent is zero.
    Zero,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Glassy => "glassy",
            Phase::Paramagnetic => "paramagnetic",
            Phase::Zero => "zero",
        }
    }
}

/// Phase of rate `rate` given the critical rate and the curve value there.
pub fn phase_of(rate: f64, r1: f64, value_at_r1: f64) -> Phase {
    if rate < r1 {
        Phase::Glassy
    } else if rate < r1 + value_at_r1 {
        Phase::Paramagnetic
    } else {
        Phase::Zero
    }
}

/// Serializes infinities as the strings `"inf"` and `"-inf"` (JSON has no
/// infinity).
pub(crate) fn extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub rate: f64,
    /// Exponent clamped at zero.
    pub value: f64,
    /// Optimized objective before clamping.
    pub unclamped: f64,
    #[serde(serialize_with = "extended")]
    pub rho_star: f64,
    pub s_star: f64,
    pub phase: Phase,
    /// `value` is only a lower bound (objective unbounded in `ρ`).
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentCurve {
    pub kind: CurveKind,
    #[serde(rename = "R1")]
    pub r1: f64,
    pub value_at_r1: f64,
    #[serde(serialize_with = "extended")]
    pub zero_rate_value: f64,
    pub points: Vec<CurvePoint>,
}

impl ExponentCurve {
    pub fn classify(&self, rate: f64) -> Phase {
        phase_of(rate, self.r1, self.value_at_r1)
    }

    /// Rate at which the straight-line part reaches zero.
    pub fn zero_crossing(&self) -> f64 {
        self.r1 + self.value_at_r1
    }

    pub fn rates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.rate).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

/// Search settings for curve construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveConfig {
    pub rho_max: f64,
    pub tol: f64,
    /// Fixed Chernoff parameter for the new bound; `None` optimizes over `s`.
    pub fixed_s: Option<f64>,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            rho_max: crate::optimize::DEFAULT_RHO_MAX,
            tol: DEFAULT_TOL,
            fixed_s: None,
        }
    }
}

impl CurveConfig {
    fn search(&self) -> SearchConfig {
        SearchConfig {
            upper: self.rho_max,
            tol: self.tol,
            grid_points: crate::optimize::DEFAULT_GRID_POINTS,
        }
    }
}

/// Optimum at one rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSolution {
    pub value: f64,
    pub rho: f64,
    pub s: f64,
    pub diverged: bool,
}

/// Solves one rate point for a given bound.
pub trait RateSolver: Sync {
    fn kind(&self) -> CurveKind;
    fn solve(&self, rate: f64) -> Result<PointSolution>;
    fn alphabet(&self) -> usize;
}

fn from_opt(o: OptResult, s: f64) -> PointSolution {
    PointSolution {
        value: o.value,
        rho: o.arg,
        s,
        diverged: o.diverged,
    }
}

struct GallagerSolver<'a> {
    inputs: &'a ExponentInputs,
    cfg: CurveConfig,
}

impl RateSolver for GallagerSolver<'_> {
    fn kind(&self) -> CurveKind {
        CurveKind::Gallager
    }

    fn solve(&self, rate: f64) -> Result<PointSolution> {
        let dm = self.inputs.distances(0.5)?;
        let q = self.inputs.input();
        let o = maximize_log_range(|rho| gallager_eg_from(&dm, q, rho) - rho * rate, 1.0, &self.cfg.search())?;
        Ok(from_opt(o, 0.5))
    }

    fn alphabet(&self) -> usize {
        self.inputs.input().len()
    }
}

struct CkmSolver {
    prob: RdProblem,
}

impl RateSolver for CkmSolver {
    fn kind(&self) -> CurveKind {
        CurveKind::CkmBhatt
    }

    fn solve(&self, rate: f64) -> Result<PointSolution> {
        Ok(from_opt(dq_of_r(&self.prob, rate, true)?, self.prob.distances().s()))
    }

    fn alphabet(&self) -> usize {
        self.prob.input().len()
    }
}

struct ChernoffSolver<'a> {
    inputs: &'a ExponentInputs,
    cfg: CurveConfig,
}

impl ChernoffSolver<'_> {
    fn inner(&self, s: f64, rate: f64) -> Result<OptResult> {
        let dm = self.inputs.distances(s)?;
        let q = self.inputs.input();
        maximize_log_range(|rho| ckm_e_from(&dm, q, rho) - rho * rate, 1.0, &self.cfg.search())
    }
}

impl RateSolver for ChernoffSolver<'_> {
    fn kind(&self) -> CurveKind {
        CurveKind::ChernoffNew
    }

    /// Outer search over `s` (33-point scan, then golden section on the best
    /// bracket), inner search over `ρ`.
    fn solve(&self, rate: f64) -> Result<PointSolution> {
        if let Some(s) = self.cfg.fixed_s {
            return Ok(from_opt(self.inner(s, rate)?, s));
        }
        let mut failure = None;
        let mut best: Option<(f64, OptResult)> = None;
        let mut probe = |s: f64| -> f64 {
            match self.inner(s, rate) {
                Ok(o) => {
                    if best.as_ref().is_none_or(|(_, b)| o.value > b.value) {
                        best = Some((s, o));
                    }
                    o.value
                }
                Err(e) => {
                    failure = Some(e);
                    f64::NAN
                }
            }
        };
        let grid = linear_grid(0.0, 1.0, S_GRID_POINTS);
        let values: Vec<f64> = grid.iter().map(|&s| probe(s)).collect();
        let top = values
            .iter()
            .enumerate()
            .fold(0, |bi, (i, &v)| if v > values[bi] { i } else { bi });
        let lo = grid[top.saturating_sub(1)];
        let hi = grid[(top + 1).min(grid.len() - 1)];
        let refined = maximize_concave(&mut probe, lo, hi, self.cfg.tol);
        if let Some(e) = failure {
            return Err(e);
        }
        refined?;
        let (s, o) = best.expect("probe ran at least once");
        Ok(from_opt(o, s))
    }

    fn alphabet(&self) -> usize {
        self.inputs.input().len()
    }
}

/// Critical rate of a solver, where its `ρ*` first reaches 1.
pub fn critical_rate(solver: &dyn RateSolver) -> Result<f64> {
    critical_rate_by(|r| solver.solve(r).map(|p| p.rho), solver.alphabet())
}

/// Default grid: [`DEFAULT_POINTS`] rates from 0 to 1.2 times the zero
/// crossing of the straight-line part.
pub fn default_rate_grid(r1: f64, value_at_r1: f64) -> Vec<f64> {
    let end = 1.2 * (r1 + value_at_r1.max(0.0));
    let end = if end > 0.0 { end } else { 1.0 };
    linear_grid(0.0, end, DEFAULT_POINTS)
}

/// Builds a curve on `rates` (or the default grid when `None`).
pub fn build_curve(solver: &dyn RateSolver, rates: Option<&[f64]>) -> Result<ExponentCurve> {
    if let Some(r) = rates {
        if r.iter().any(|v| !(*v >= 0.0)) || r.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("rate grid must be sorted and nonnegative".into()));
        }
    }
    let r1 = critical_rate(solver)?;
    let at_r1 = solver.solve(r1)?;
    let value_at_r1 = at_r1.value;
    let at_zero = solver.solve(0.0)?;
    let zero_rate_value = if at_zero.diverged { f64::INFINITY } else { at_zero.value.max(0.0) };
    let owned;
    let rates = match rates {
        Some(r) => r,
        None => {
            owned = default_rate_grid(r1, value_at_r1);
            &owned
        }
    };
    let points = rates
        .par_iter()
        .map(|&rate| {
            let sol = solver.solve(rate)?;
            Ok(CurvePoint {
                rate,
                value: sol.value.max(0.0),
                unclamped: sol.value,
                rho_star: sol.rho,
                s_star: sol.s,
                phase: phase_of(rate, r1, value_at_r1),
                diverged: sol.diverged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExponentCurve {
        kind: solver.kind(),
        r1,
        value_at_r1,
        zero_rate_value,
        points,
    })
}

/// Gallager's expurgated curve; `s` fixed at 1/2, its optimum.
pub fn curve_gallager(inputs: &ExponentInputs, rates: Option<&[f64]>, cfg: &CurveConfig) -> Result<ExponentCurve> {
    build_curve(&GallagerSolver { inputs, cfg: *cfg }, rates)
}

/// CKM expurgated curve in its parametric form, Bhattacharyya distance.
pub fn curve_ckm(inputs: &ExponentInputs, rates: Option<&[f64]>, cfg: &CurveConfig) -> Result<ExponentCurve> {
    let prob = RdProblem::new(inputs.input().clone(), (*inputs.distances(0.5)?).clone())?.with_rho_max(cfg.rho_max);
    build_curve(&CkmSolver { prob }, rates)
}

/// Chernoff-improved curve, optimized over `s` unless `cfg.fixed_s` is set.
pub fn curve_chernoff_new(inputs: &ExponentInputs, rates: Option<&[f64]>, cfg: &CurveConfig) -> Result<ExponentCurve> {
    build_curve(&ChernoffSolver { inputs, cfg: *cfg }, rates)
}

/// All three curves on a common grid. With `rates = None` the grid is the
/// default grid of the largest (Chernoff-improved) curve.
pub fn curve_triple(
    inputs: &ExponentInputs,
    rates: Option<&[f64]>,
    cfg: &CurveConfig,
) -> Result<[ExponentCurve; 3]> {
    let new = curve_chernoff_new(inputs, rates, cfg)?;
    let grid = new.rates();
    let ckm = curve_ckm(inputs, Some(&grid), cfg)?;
    let gal = curve_gallager(inputs, Some(&grid), cfg)?;
    Ok([gal, ckm, new])
}

fn rd_at(inputs: &ExponentInputs, s: f64) -> Result<RdProblem> {
    RdProblem::new(inputs.input().clone(), (*inputs.distances(s)?).clone())
}

/// `E_1(R,ρ)` at Chernoff parameter `s`, from its closed form: the tangent
/// line `D_ρ + ρ[R_Q(D_ρ) - R]` for `R <= R_Q(D_ρ)` and `D_Q(R)` above, where
/// `D_ρ` is the distortion at which the slope of `R_Q` is `-1/ρ`.
pub fn e1_diagnostic(inputs: &ExponentInputs, s: f64, rate: f64, rho: f64) -> Result<f64> {
    if !(rho >= 1.0) {
        return Err(Error::InvalidParameter(format!("rho = {rho} < 1")));
    }
    let prob = rd_at(inputs, s)?;
    let (d_rho, r_rho) = prob.tilted_point(1.0 / rho);
    if rate <= r_rho {
        Ok(d_rho + rho * (r_rho - rate))
    } else {
        Ok(dq_of_r(&prob, rate, false)?.value)
    }
}

/// `E_2(R) = sup_{ρ>=1} [E(ρ,s,Q) - ρR]` (unclamped).
pub fn e2_diagnostic(inputs: &ExponentInputs, s: f64, rate: f64) -> Result<f64> {
    Ok(dq_of_r(&rd_at(inputs, s)?, rate, true)?.value)
}
