//! C ABI for the `expurgated` exponent library.
//!
//! Channels and exponent inputs live behind opaque handles created by
//! `exp_*_new` and released by the matching `exp_*_free`. Every fallible call
//! returns an [`ExpStatus`] and writes results through out-pointers; the text
//! of the last error on the calling thread is available from
//! [`exp_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use expurgated::curves::{curve_chernoff_new, curve_ckm, curve_gallager, CurveConfig, ExponentCurve};
use expurgated::ensemble::{moment_exponent_empirical, moment_exponent_theory, EnumeratorModel, MomentMode};
use expurgated::gaussian::{gaussian_d_of_r, gaussian_exponent_curve, gaussian_r_of_d, GaussianParams};
use expurgated::{Channel, Error, ExponentInputs, InputDistribution};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// The transition matrix is not a valid stochastic matrix.
    InvalidChannel = 2,
    /// The input distribution is invalid or does not fit the channel.
    InvalidDistribution = 3,
    /// A scalar argument is out of range.
    InvalidParameter = 4,
    /// An argument lies outside the domain of a closed-form function.
    DomainError = 5,
    /// A numerical routine failed (NaN objective or unbounded optimum).
    NumericalError = 6,
    /// An output buffer is shorter than required.
    BufferTooSmall = 7,
    /// An internal panic was caught.
    Panic = 8,
}

/// Which exponent curve to compute.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpCurveKind {
    Gallager = 0,
    CkmBhattacharyya = 1,
    ChernoffNew = 2,
}

/// Estimator for the fractional moment of the enumerator.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpMomentMode {
    ExactBinomial = 0,
    MonteCarlo = 1,
}

/// Opaque discrete memoryless channel.
pub struct ExpChannel(Channel);

/// Opaque channel plus input distribution, with cached distance matrices.
pub struct ExpInputs(ExponentInputs);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> ExpStatus {
    match err {
        Error::EmptyMatrix
        | Error::RaggedRow { .. }
        | Error::InputAlphabetTooSmall(_)
        | Error::NegativeEntry { .. }
        | Error::NonFiniteEntry { .. }
        | Error::NonStochasticRow { .. } => ExpStatus::InvalidChannel,
        Error::InvalidDistribution(_) | Error::DimensionMismatch { .. } => ExpStatus::InvalidDistribution,
        Error::DomainError { .. } => ExpStatus::DomainError,
        Error::NonFinite { .. } | Error::Diverged(_) | Error::NoFiniteR1 { .. } => ExpStatus::NumericalError,
        Error::InvalidParameter(_)
        | Error::AlphabetTooLarge(_)
        | Error::InvalidRateFunction { .. }
        | Error::TooManyCodewords(_)
        | Error::TooFewTrials(_) => ExpStatus::InvalidParameter,
    }
}

/// Failure inside a call, before translation to a status code.
enum Fail {
    Lib(Error),
    Status(ExpStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn null() -> Fail {
    Fail::Status(ExpStatus::NullPointer, "null pointer argument".into())
}

/// Runs `f`, converting errors and panics into a status and the thread's
/// last-error message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ExpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ExpStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            ExpStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or valid for `len` reads.
unsafe fn input_slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` is null or valid for `len` writes.
unsafe fn output_slice<'a>(p: *mut f64, len: usize) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

/// # Safety
/// `p` is null or valid for one write.
unsafe fn write<T>(p: *mut T, v: T) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null());
    }
    p.write(v);
    Ok(())
}

/// # Safety
/// `p` is null or a live handle.
unsafe fn inputs_ref<'a>(p: *const ExpInputs) -> Result<&'a ExponentInputs, Fail> {
    p.as_ref().map(|h| &h.0).ok_or_else(null)
}

/// Message of the last failed call on this thread, or null if the last call
/// succeeded. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn exp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a channel from a row-major `nx` by `ny` transition matrix.
///
/// # Safety
/// `rows` must be valid for `nx * ny` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn exp_channel_new(
    rows: *const f64,
    nx: usize,
    ny: usize,
    out: *mut *mut ExpChannel,
) -> ExpStatus {
    guard(|| {
        let len = nx.checked_mul(ny).ok_or(Error::EmptyMatrix)?;
        let data = input_slice(rows, len)?;
        if ny == 0 {
            return Err(Error::EmptyMatrix.into());
        }
        let ch = Channel::new(data.chunks(ny).map(<[f64]>::to_vec).collect())?;
        write(out, Box::into_raw(Box::new(ExpChannel(ch))))
    })
}

/// Releases a channel. Null is ignored.
///
/// # Safety
/// `ch` must be null or a handle from [`exp_channel_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn exp_channel_free(ch: *mut ExpChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// Pairs a channel with an input distribution `q` of length `len`. The
/// channel is copied, so it may be freed afterwards.
///
/// # Safety
/// `ch` must be a live handle, `q` valid for `len` reads and `out` for one
/// write.
#[no_mangle]
pub unsafe extern "C" fn exp_inputs_new(
    ch: *const ExpChannel,
    q: *const f64,
    len: usize,
    out: *mut *mut ExpInputs,
) -> ExpStatus {
    guard(|| {
        let ch = ch.as_ref().ok_or_else(null)?;
        let q = InputDistribution::new(input_slice(q, len)?.to_vec())?;
        let inputs = ExponentInputs::new(ch.0.clone(), q)?;
        write(out, Box::into_raw(Box::new(ExpInputs(inputs))))
    })
}

/// Releases exponent inputs. Null is ignored.
///
/// # Safety
/// `inputs` must be null or a handle from [`exp_inputs_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn exp_inputs_free(inputs: *mut ExpInputs) {
    if !inputs.is_null() {
        drop(Box::from_raw(inputs));
    }
}

/// Gallager's `E_0(rho, q)` in nats.
///
/// # Safety
/// `inputs` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn exp_e0(inputs: *const ExpInputs, rho: f64, out: *mut f64) -> ExpStatus {
    guard(|| write(out, inputs_ref(inputs)?.gallager_e0(rho)?))
}

/// Expurgated exponent `E_G(rho, s)` with Chernoff distance of order `s`.
/// An infinite value is reported as `+inf`.
///
/// # Safety
/// `inputs` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn exp_eg(inputs: *const ExpInputs, rho: f64, s: f64, out: *mut f64) -> ExpStatus {
    guard(|| write(out, inputs_ref(inputs)?.gallager_eg(rho, s)?))
}

/// Improved expurgated exponent `E(rho, s)` in nats.
///
/// # Safety
/// `inputs` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn exp_ckm_e(inputs: *const ExpInputs, rho: f64, s: f64, out: *mut f64) -> ExpStatus {
    guard(|| write(out, inputs_ref(inputs)?.ckm_e(rho, s)?))
}

/// `max_s E(rho, s)` and its maximizer.
///
/// # Safety
/// `inputs` must be a live handle; `value` and `s_star` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn exp_ckm_e_best_s(
    inputs: *const ExpInputs,
    rho: f64,
    value: *mut f64,
    s_star: *mut f64,
) -> ExpStatus {
    guard(|| {
        let r = inputs_ref(inputs)?.ckm_e_best_s(rho)?;
        write(value, r.value)?;
        write(s_star, r.arg)
    })
}

/// Fills `out` (row-major, `len >= nx * nx`) with the Chernoff distance
/// matrix of order `s`. Infinite distances are `+inf`.
///
/// # Safety
/// `inputs` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn exp_distance_matrix(
    inputs: *const ExpInputs,
    s: f64,
    out: *mut f64,
    len: usize,
) -> ExpStatus {
    guard(|| {
        let dm = inputs_ref(inputs)?.distances(s)?;
        let entries = dm.entries();
        if len < entries.len() {
            return Err(Fail::Status(
                ExpStatus::BufferTooSmall,
                format!("distance matrix needs {} entries, buffer has {len}", entries.len()),
            ));
        }
        output_slice(out, entries.len())?.copy_from_slice(entries);
        Ok(())
    })
}

/// Evaluates one exponent curve on the sorted nonnegative `rates`.
///
/// `values` receives the exponent at each rate. `rho_star` and `s_star` may
/// be null; otherwise they receive the optimizing parameters. `r1` may be
/// null; otherwise it receives the critical rate.
///
/// `rho_max <= 0` selects the default cap on `rho`.
///
/// # Safety
/// `inputs` must be a live handle, `rates` and `values` valid for `n`
/// elements, and each non-null optional output valid for `n` writes (one for
/// `r1`).
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn exp_curve(
    inputs: *const ExpInputs,
    kind: ExpCurveKind,
    rates: *const f64,
    n: usize,
    rho_max: f64,
    values: *mut f64,
    rho_star: *mut f64,
    s_star: *mut f64,
    r1: *mut f64,
) -> ExpStatus {
    guard(|| {
        let inputs = inputs_ref(inputs)?;
        let rates = input_slice(rates, n)?;
        let mut cfg = CurveConfig::default();
        if rho_max > 0.0 {
            cfg.rho_max = rho_max;
        }
        let curve = match kind {
            ExpCurveKind::Gallager => curve_gallager(inputs, Some(rates), &cfg)?,
            ExpCurveKind::CkmBhattacharyya => curve_ckm(inputs, Some(rates), &cfg)?,
            ExpCurveKind::ChernoffNew => curve_chernoff_new(inputs, Some(rates), &cfg)?,
        };
        export_curve(&curve, values, rho_star, s_star, r1)
    })
}

/// # Safety
/// As for [`exp_curve`], with `n = curve.points.len()`.
unsafe fn export_curve(
    curve: &ExponentCurve,
    values: *mut f64,
    rho_star: *mut f64,
    s_star: *mut f64,
    r1: *mut f64,
) -> Result<(), Fail> {
    let n = curve.points.len();
    let values = output_slice(values, n)?;
    for (v, p) in values.iter_mut().zip(&curve.points) {
        *v = p.value;
    }
    if !rho_star.is_null() {
        for (v, p) in output_slice(rho_star, n)?.iter_mut().zip(&curve.points) {
            *v = p.rho_star;
        }
    }
    if !s_star.is_null() {
        for (v, p) in output_slice(s_star, n)?.iter_mut().zip(&curve.points) {
            *v = p.s_star;
        }
    }
    if !r1.is_null() {
        r1.write(curve.r1);
    }
    Ok(())
}

/// Gaussian-channel distortion-rate function `D(R)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn exp_gaussian_d_of_r(power: f64, sigma2: f64, rate: f64, out: *mut f64) -> ExpStatus {
    guard(|| write(out, gaussian_d_of_r(&GaussianParams::new(power, sigma2)?, rate)?))
}

/// Gaussian-channel rate-distortion function `R(D)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn exp_gaussian_r_of_d(power: f64, sigma2: f64, distortion: f64, out: *mut f64) -> ExpStatus {
    guard(|| write(out, gaussian_r_of_d(&GaussianParams::new(power, sigma2)?, distortion)?))
}

/// Gaussian-channel expurgated exponent on the sorted nonnegative `rates`,
/// with the same output conventions as [`exp_curve`].
///
/// # Safety
/// `rates` and `values` must be valid for `n` elements, each non-null
/// optional output for `n` writes (one for `r1`).
#[no_mangle]
pub unsafe extern "C" fn exp_gaussian_curve(
    power: f64,
    sigma2: f64,
    rates: *const f64,
    n: usize,
    values: *mut f64,
    rho_star: *mut f64,
    r1: *mut f64,
) -> ExpStatus {
    guard(|| {
        let p = GaussianParams::new(power, sigma2)?;
        let curve = gaussian_exponent_curve(&p, input_slice(rates, n)?)?;
        export_curve(&curve, values, rho_star, ptr::null_mut(), r1)
    })
}

/// Theoretical exponent of the fractional moment `E[N^{1/rho}]` of the
/// enumerator with block length `n`, rate `rate` and type exponent
/// `type_exponent`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn exp_moment_theory(
    n: usize,
    rate: f64,
    type_exponent: f64,
    rho: f64,
    out: *mut f64,
) -> ExpStatus {
    guard(|| {
        let m = EnumeratorModel::new(n, rate, type_exponent, rho)?;
        write(out, moment_exponent_theory(&m))
    })
}

/// Empirical moment exponent `(1/n) ln E[N^{1/rho}]`. `trials` and `seed`
/// apply to Monte Carlo mode only. `underflow` may be null.
///
/// # Safety
/// `out` must be valid for one write; `underflow` null or valid for one write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn exp_moment_empirical(
    n: usize,
    rate: f64,
    type_exponent: f64,
    rho: f64,
    mode: ExpMomentMode,
    trials: usize,
    seed: u64,
    out: *mut f64,
    underflow: *mut bool,
) -> ExpStatus {
    guard(|| {
        let m = EnumeratorModel::new(n, rate, type_exponent, rho)?;
        let mode = match mode {
            ExpMomentMode::ExactBinomial => MomentMode::ExactBinomial,
            ExpMomentMode::MonteCarlo => MomentMode::MonteCarlo,
        };
        let est = moment_exponent_empirical(&m, mode, trials, seed)?;
        write(out, est.exponent)?;
        if !underflow.is_null() {
            underflow.write(est.underflow);
        }
        Ok(())
    })
}
