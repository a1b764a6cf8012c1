//! Additive Gaussian channel with codewords drawn uniformly from the sphere of
//! radius `√(nS)`. With `s = 1/2` the Chernoff distance is
//! `(x - x')² / (8σ²)` and the pairwise rate function has the closed forms
//!
//! ```text
//! R(D) = ½ ln[ S / (8σ²D(1 - 2σ²D/S)) ]
//! D(R) = S(1 - √(1 - e^{-2R})) / (4σ²)
//! ```
//!
//! `D(R)` is the curvy part of the expurgated exponent; past the critical rate
//! the exponent follows the tangent of slope -1.

use crate::curves::{phase_of, CurveKind, CurvePoint, ExponentCurve};
use crate::error::{Error, Result};

/// Bisection bracket and tolerance for the critical rate.
const R1_LO: f64 = 1e-6;
const R1_HI: f64 = 10.0;
const R1_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    s_power: f64,
    sigma2: f64,
}

impl GaussianParams {
    pub fn new(s_power: f64, sigma2: f64) -> Result<Self> {
        if !(s_power > 0.0 && s_power.is_finite()) {
            return Err(Error::InvalidParameter(format!("input power S = {s_power}")));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise variance = {sigma2}")));
        }
        Ok(Self { s_power, sigma2 })
    }

    pub fn s_power(&self) -> f64 {
        self.s_power
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `S/(4σ²)`: the zero-rate distance, where `R(D)` reaches 0.
    pub fn zero_rate_distance(&self) -> f64 {
        self.s_power / (4.0 * self.sigma2)
    }
}

/// `R(D)`. Between `S/(4σ²)` and `S/(2σ²)` the closed form turns back up,
/// but a rate function is nonincreasing, so that stretch is reported as 0.
pub fn gaussian_r_of_d(p: &GaussianParams, distortion: f64) -> Result<f64> {
    let u = distortion / p.zero_rate_distance();
    if !(distortion > 0.0) || !(u < 2.0) {
        return Err(Error::DomainError {
            what: "D",
            value: distortion,
        });
    }
    if u >= 1.0 {
        return Ok(0.0);
    }
    // With u = 4σ²D/S the log argument is 1/(u(2-u)) = 1/(1 - (1-u)²).
    Ok((-0.5 * (-(1.0 - u) * (1.0 - u)).ln_1p()).max(0.0))
}

/// `D(R)`, with `1 - √(1 - e^{-2R})` rewritten as
/// `e^{-2R} / (1 + √(1 - e^{-2R}))` to avoid cancellation at large `R`.
pub fn gaussian_d_of_r(p: &GaussianParams, rate: f64) -> Result<f64> {
    if !(rate >= 0.0) {
        return Err(Error::DomainError {
            what: "R",
            value: rate,
        });
    }
    let e = (-2.0 * rate).exp();
    let root = (-(-2.0 * rate).exp_m1()).sqrt();
    Ok(p.zero_rate_distance() * e / (1.0 + root))
}

fn slope(p: &GaussianParams, rate: f64) -> f64 {
    let h = 1e-6 * rate.max(1.0);
    let lo = (rate - h).max(0.0);
    let d = |r| gaussian_d_of_r(p, r).expect("nonnegative rate");
    (d(rate + h) - d(lo)) / (rate + h - lo)
}

/// Rate where `D'(R) = -1`, by bisection on a central-difference slope.
/// If the slope is already above -1 at the lower end of the bracket the
/// curve has no curvy part and 0 is returned.
pub fn gaussian_r1(p: &GaussianParams) -> f64 {
    if slope(p, R1_LO) >= -1.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (R1_LO, R1_HI);
    if slope(p, hi) < -1.0 {
        return hi;
    }
    while hi - lo > R1_TOL {
        let mid = 0.5 * (lo + hi);
        if slope(p, mid) < -1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exponent at one rate: `D(R)` below `R_1`, `D(R_1) + R_1 - R` above, at
/// least 0.
pub fn gaussian_exponent(p: &GaussianParams, r1: f64, rate: f64) -> Result<f64> {
    if rate <= r1 {
        gaussian_d_of_r(p, rate)
    } else {
        Ok((gaussian_d_of_r(p, r1)? + r1 - rate).max(0.0))
    }
}

/// Gaussian exponent curve on `rates` (sorted, nonnegative).
pub fn gaussian_exponent_curve(p: &GaussianParams, rates: &[f64]) -> Result<ExponentCurve> {
    if rates.iter().any(|r| !(*r >= 0.0)) || rates.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("rate grid must be sorted and nonnegative".into()));
    }
    let r1 = gaussian_r1(p);
    let value_at_r1 = gaussian_d_of_r(p, r1)?;
    let points = rates
        .iter()
        .map(|&rate| {
            let unclamped = if rate <= r1 {
                gaussian_d_of_r(p, rate)?
            } else {
                value_at_r1 + r1 - rate
            };
            Ok(CurvePoint {
                rate,
                value: unclamped.max(0.0),
                unclamped,
                // Curvy part: the ensemble is glassy and the ρ-optimum is infinite.
                rho_star: if rate < r1 { f64::INFINITY } else { 1.0 },
                s_star: 0.5,
                phase: phase_of(rate, r1, value_at_r1),
                diverged: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExponentCurve {
        kind: CurveKind::Gaussian,
        r1,
        value_at_r1,
        zero_rate_value: p.zero_rate_distance(),
        points,
    })
}

/// `R(D)` extended to `[0, ∞)` as a rate function: `+inf` at 0 and 0 from
/// `S/(4σ²)` on.
pub fn gaussian_rate_function(p: GaussianParams) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    move |d| {
        if d <= 0.0 {
            f64::INFINITY
        } else if d >= p.zero_rate_distance() {
            0.0
        } else {
            gaussian_r_of_d(&p, d).expect("inside the domain")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linear_grid;
    use proptest::prelude::*;

    fn unit() -> GaussianParams {
        GaussianParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn rate_at_quarter_is_zero() {
        assert_eq!(gaussian_r_of_d(&unit(), 0.25).unwrap(), 0.0);
    }

    #[test]
    fn rate_at_tenth() {
        // ½ ln[1 / (8 · 0.1 · (1 - 0.2))]
        let direct = 0.5 * (1.0 / (8.0 * 0.1 * 0.8f64)).ln();
        assert!((gaussian_r_of_d(&unit(), 0.1).unwrap() - direct).abs() < 1e-14);
        assert!((direct - 0.22314).abs() < 1e-5);
    }

    #[test]
    fn rate_blows_up_near_zero() {
        let mut prev = 0.0;
        for k in 1..12 {
            let r = gaussian_r_of_d(&unit(), 10f64.powi(-k)).unwrap();
            assert!(r > prev);
            prev = r;
        }
        assert!(prev > 10.0);
    }

    #[test]
    fn domain_errors() {
        let p = unit();
        assert!(matches!(gaussian_r_of_d(&p, 0.0), Err(Error::DomainError { .. })));
        assert!(matches!(gaussian_r_of_d(&p, -1.0), Err(Error::DomainError { .. })));
        assert!(matches!(gaussian_r_of_d(&p, 0.5), Err(Error::DomainError { .. })));
        assert_eq!(gaussian_r_of_d(&p, 0.4).unwrap(), 0.0);
        assert!(gaussian_d_of_r(&p, -0.1).is_err());
        assert!(GaussianParams::new(0.0, 1.0).is_err());
        assert!(GaussianParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn distance_at_zero_rate() {
        assert_eq!(gaussian_d_of_r(&unit(), 0.0).unwrap(), 0.25);
        let p = GaussianParams::new(3.0, 0.5).unwrap();
        assert_eq!(gaussian_d_of_r(&p, 0.0).unwrap(), 1.5);
    }

    #[test]
    fn large_rate_series() {
        let d = gaussian_d_of_r(&unit(), 5.0).unwrap();
        let series = (-10f64).exp() / 8.0;
        assert!((d / series - 1.0).abs() < 0.01);
    }

    #[test]
    fn round_trip_grid() {
        let p = unit();
        for r in linear_grid(0.01, 5.0, 500) {
            let back = gaussian_r_of_d(&p, gaussian_d_of_r(&p, r).unwrap()).unwrap();
            assert!((back - r).abs() < 1e-10, "{r} -> {back}");
        }
    }

    #[test]
    fn critical_rate_unit() {
        let p = unit();
        let r1 = gaussian_r1(&p);
        // Closed-form slope: D'(R) = -(S/4σ²) e^{-2R} / √(1 - e^{-2R}).
        let e = (-2.0 * r1).exp();
        let exact = -0.25 * e / (1.0 - e).sqrt();
        assert!((exact + 1.0).abs() < 1e-5, "{r1}: {exact}");
        assert!((r1 - 0.02867).abs() < 1e-4);
    }

    #[test]
    fn low_snr_has_no_curvy_part() {
        let p = GaussianParams::new(1e-4, 1.0).unwrap();
        assert_eq!(gaussian_r1(&p), 0.0);
    }

    #[test]
    fn curve_shape() {
        let p = unit();
        let rates = linear_grid(0.0, 0.4, 401);
        let c = gaussian_exponent_curve(&p, &rates).unwrap();
        assert_eq!(c.points[0].value, 0.25);
        let v = c.values();
        for w in v.windows(3) {
            assert!(w[1] <= w[0]);
            assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-12);
        }
        assert_eq!(*v.last().unwrap(), 0.0);
        let h = 1e-5;
        let right = (gaussian_exponent(&p, c.r1, c.r1 + h).unwrap() - gaussian_exponent(&p, c.r1, c.r1).unwrap()) / h;
        assert!((right + 1.0).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn scaling_covariance(s in 0.1f64..10.0, n in 0.1f64..10.0, r in 0.0f64..5.0) {
            let a = gaussian_d_of_r(&GaussianParams::new(s, n).unwrap(), r).unwrap();
            let b = gaussian_d_of_r(&GaussianParams::new(2.0 * s, 2.0 * n).unwrap(), r).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn inverse_pair(s in 0.1f64..10.0, n in 0.1f64..10.0, r in 0.01f64..5.0) {
            let p = GaussianParams::new(s, n).unwrap();
            let back = gaussian_r_of_d(&p, gaussian_d_of_r(&p, r).unwrap()).unwrap();
            prop_assert!((back - r).abs() <= 1e-10);
        }
    }
}
