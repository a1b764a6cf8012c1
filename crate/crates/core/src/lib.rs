//! Expurgated error exponents for discrete memoryless channels.
//!
//! The crate evaluates Gallager's expurgated exponent, the
//! Csiszár–Körner–Marton (CKM) expurgated exponent and its Chernoff-distance
//! improvement, expresses the latter through a rate-distortion function of
//! the input distribution, and checks the random-energy-model picture behind
//! it with closed-form Gaussian examples and Monte Carlo moments of the
//! distance enumerator.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod curves;
pub mod ensemble;
pub mod error;
pub mod export;
pub mod exponents;
pub mod gaussian;
pub mod numeric;
pub mod optimize;
pub mod rate_distortion;

#[cfg(test)]
mod testutil;

pub use channel::{chernoff_distance_matrix, expected_distance, Channel, ChannelSpec, DistanceMatrix, InputDistribution};
pub use curves::{curve_chernoff_new, curve_ckm, curve_gallager, CurveConfig, CurveKind, CurvePoint, ExponentCurve, Phase};
pub use error::{Error, Result};
pub use ensemble::{EnumeratorModel, MomentMode, RateFunction};
pub use exponents::ExponentInputs;
pub use gaussian::GaussianParams;
pub use optimize::OptResult;
pub use rate_distortion::{critical_rate_r1, dq_of_r, rq_of_d, RdProblem};
