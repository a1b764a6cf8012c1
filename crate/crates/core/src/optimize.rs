//! One-dimensional maximization: golden-section search on a bracket, and a
//! log-grid scan followed by golden-section refinement for the half-line
//! parameters (`ρ`, and the Legendre variable of the rate-distortion code).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{linear_grid, log_grid};

/// Golden-section ratio `(√5 - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

pub const DEFAULT_RHO_MAX: f64 = 1e4;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_GRID_POINTS: usize = 64;

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptResult {
    pub value: f64,
    pub arg: f64,
    /// The maximizer sits on an end of the search range.
    pub at_boundary: bool,
    /// The objective was still growing without sign of saturation at the
    /// upper end; `value` is then only a lower bound on the supremum.
    pub diverged: bool,
}

/// Settings for the half-line searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub upper: f64,
    pub tol: f64,
    pub grid_points: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            upper: DEFAULT_RHO_MAX,
            tol: DEFAULT_TOL,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

impl SearchConfig {
    pub fn with_upper(upper: f64) -> Self {
        Self {
            upper,
            ..Self::default()
        }
    }
}

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_nan() {
        Err(Error::NonFinite { at: x })
    } else {
        Ok(v)
    }
}

/// Golden-section search for the maximum of a concave `f` on `[lo, hi]`.
///
/// Both endpoints are evaluated as well, so a maximum on the boundary is
/// reported exactly at the endpoint.
pub fn maximize_concave<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<OptResult> {
    if !(tol > 0.0) || !(hi >= lo) {
        return Err(Error::InvalidParameter(format!(
            "bracket [{lo}, {hi}] with tol {tol}"
        )));
    }
    let f_lo = eval(&mut f, lo)?;
    let f_hi = eval(&mut f, hi)?;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(&mut f, c)?;
    let mut fd = eval(&mut f, d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(&mut f, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(&mut f, d)?;
        }
    }
    let (mut arg, mut value) = if fc >= fd { (c, fc) } else { (d, fd) };
    // Ties go to the interior point, so a flat objective is not reported on the boundary.
    if f_lo > value {
        arg = lo;
        value = f_lo;
    }
    if f_hi > value {
        arg = hi;
        value = f_hi;
    }
    Ok(OptResult {
        value,
        arg,
        at_boundary: arg == lo || arg == hi,
        diverged: false,
    })
}

/// Maximum of a concave function of `s ∈ [0,1]`.
pub fn maximize_concave_unit<F: FnMut(f64) -> f64>(f: F, tol: f64) -> Result<OptResult> {
    maximize_concave(f, 0.0, 1.0, tol)
}

/// Scan `n` evenly spaced points of `[lo, hi]`, then golden-section the
/// bracket around the best one. Guards against non-concave objectives.
pub fn maximize_scan<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize, tol: f64) -> Result<OptResult> {
    let grid = linear_grid(lo, hi, n.max(3));
    refine_on_grid(&mut f, &grid, tol).map(|(r, _)| r)
}

/// Grid scan plus golden refinement; also returns the grid values.
fn refine_on_grid<F: FnMut(f64) -> f64>(f: &mut F, grid: &[f64], tol: f64) -> Result<(OptResult, Vec<f64>)> {
    let values = grid
        .iter()
        .map(|&x| eval(f, x))
        .collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |bi, (i, &v)| if v > values[bi] { i } else { bi });
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let mut refined = maximize_concave(&mut *f, lo, hi, tol)?;
    // Ties keep the grid point, so a flat objective reports the lower end.
    if values[best] >= refined.value {
        refined.value = values[best];
        refined.arg = grid[best];
    }
    refined.at_boundary = refined.arg == grid[0] || refined.arg == grid[grid.len() - 1];
    Ok((refined, values))
}

/// Maximum of `g` over `[lower, cfg.upper]` with `lower > 0`.
///
/// Scans a log-spaced grid, then refines the bracket around the best grid
/// point. If the best grid point is the upper end and the last grid
/// increments are positive and not shrinking, the objective is taken to grow
/// without bound and `diverged` is set; the reported value is then
/// `g(upper)`, a lower bound. An objective that saturates (increments
/// shrinking, as for a finite asymptote) is reported at the upper end with
/// `at_boundary` only.
pub fn maximize_log_range<F: FnMut(f64) -> f64>(mut g: F, lower: f64, cfg: &SearchConfig) -> Result<OptResult> {
    if !(lower > 0.0) || !(cfg.upper >= lower) || !(cfg.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "range [{lower}, {}] with tol {}",
            cfg.upper, cfg.tol
        )));
    }
    if cfg.upper == lower {
        let v = eval(&mut g, lower)?;
        return Ok(OptResult {
            value: v,
            arg: lower,
            at_boundary: true,
            diverged: false,
        });
    }
    let grid = log_grid(lower, cfg.upper, cfg.grid_points.max(4));
    let (mut res, values) = refine_on_grid(&mut g, &grid, cfg.tol)?;
    let n = values.len();
    let top = values[n - 1];
    if res.arg == cfg.upper || top > res.value {
        let inc_last = values[n - 1] - values[n - 2];
        let inc_prev = values[n - 2] - values[n - 3];
        res.value = top;
        res.arg = cfg.upper;
        res.at_boundary = true;
        res.diverged = inc_last > 0.0 && inc_prev > 0.0 && inc_last >= inc_prev;
    }
    Ok(res)
}

/// Maximum of `g(ρ)` over `ρ ∈ [1, rho_max]`.
pub fn maximize_over_rho<F: FnMut(f64) -> f64>(g: F, rho_max: f64, tol: f64) -> Result<OptResult> {
    if !(rho_max >= 1.0) {
        return Err(Error::InvalidParameter(format!("rho_max = {rho_max} < 1")));
    }
    maximize_log_range(
        g,
        1.0,
        &SearchConfig {
            upper: rho_max,
            tol,
            grid_points: DEFAULT_GRID_POINTS,
        },
    )
}
