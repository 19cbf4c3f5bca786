//! C ABI over `betacount`.
//!
//! Objects are opaque heap handles created by `bc_*_new*` and released by the
//! matching `bc_*_free`. Every fallible call returns a [`BcStatus`]; on
//! failure [`bc_last_error_message`] describes the most recent error on the
//! calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use betacount::counting::count_prefixes;
use betacount::density::{integral, iterate_f_n};
use betacount::garsia::level_entropy;
use betacount::numeric::{make_beta, Backend, BetaParam, BetaSpec, Limits, Point};
use betacount::random_beta::{estimate_mu_s, McParams};
use betacount::Error;
use num_rational::BigRational;

/// Status codes. `BC_STATUS_OK` is zero; the rest mirror the library error kinds.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcStatus {
    Ok = 0,
    NullPointer = 1,
    OutOfRange = 2,
    InvalidPolynomial = 3,
    BackendMismatch = 4,
    PointOutsideInterval = 5,
    DepthExceeded = 6,
    OutputTooLarge = 7,
    PieceBudgetExceeded = 8,
    SupportViolation = 9,
    OmegaExhausted = 10,
    InvalidParams = 11,
    Panic = 12,
}

impl From<&Error> for BcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::OutOfRange(_) => BcStatus::OutOfRange,
            Error::InvalidPolynomial { .. } => BcStatus::InvalidPolynomial,
            Error::BackendMismatch => BcStatus::BackendMismatch,
            Error::PointOutsideInterval { .. } => BcStatus::PointOutsideInterval,
            Error::DepthExceeded { .. } => BcStatus::DepthExceeded,
            Error::OutputTooLarge { .. } => BcStatus::OutputTooLarge,
            Error::PieceBudgetExceeded { .. } => BcStatus::PieceBudgetExceeded,
            Error::SupportViolation(_) => BcStatus::SupportViolation,
            Error::OmegaExhausted { .. } => BcStatus::OmegaExhausted,
            Error::InvalidParams(_) => BcStatus::InvalidParams,
        }
    }
}

/// A validated base β.
pub struct BcBeta(BetaParam);

/// A point of `I_β` in the backend of the β it was made from.
pub struct BcPoint(Point);

/// The density `f_n` as `f64` pieces.
pub struct BcDensity {
    pieces: Vec<[f64; 3]>,
    integral: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Run `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), BcStatus>) -> BcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BcStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("Panic: {msg}"));
            BcStatus::Panic
        }
    }
}

fn fail(e: Error) -> BcStatus {
    set_last_error(&e.to_string());
    BcStatus::from(&e)
}

fn null(what: &str) -> BcStatus {
    set_last_error(&format!("NullPointer: {what} is null"));
    BcStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, BcStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), BcStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn rational(num: i64, den: i64) -> Result<BigRational, BcStatus> {
    if den == 0 {
        return Err(fail(Error::InvalidParams("zero denominator".into())));
    }
    Ok(BigRational::new(num.into(), den.into()))
}

/// Message for the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bc_beta_new_float(value: f64, tolerance: f64, out: *mut *mut BcBeta) -> BcStatus {
    guard(|| {
        let beta = make_beta(BetaSpec::Float { value, tolerance }).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(BcBeta(beta))), "out")
    })
}

/// β with `β^2 = aβ + b`, computed exactly.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bc_beta_new_quadratic(a: i64, b: i64, out: *mut *mut BcBeta) -> BcStatus {
    guard(|| {
        let beta = make_beta(BetaSpec::Quadratic { a, b }).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(BcBeta(beta))), "out")
    })
}

/// # Safety
/// `beta` must come from `bc_beta_new_*` and not be freed twice. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn bc_beta_free(beta: *mut BcBeta) {
    if !beta.is_null() {
        drop(Box::from_raw(beta));
    }
}

/// β as a double, or NaN for a null handle.
///
/// # Safety
/// `beta` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_beta_value(beta: *const BcBeta) -> f64 {
    beta.as_ref().map_or(f64::NAN, |b| b.0.value())
}

/// The double `x`, converted exactly to the backend of `beta`.
///
/// # Safety
/// `beta` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bc_point_from_f64(beta: *const BcBeta, x: f64, out: *mut *mut BcPoint) -> BcStatus {
    guard(|| {
        let beta = deref(beta, "beta")?;
        let r = BigRational::from_float(x).ok_or_else(|| fail(Error::InvalidParams(format!("{x} is not finite"))))?;
        write_out(out, Box::into_raw(Box::new(BcPoint(beta.0.point_from_rational(&r)))), "out")
    })
}

/// The point `p_num/p_den + (q_num/q_den)·β`.
///
/// # Safety
/// `beta` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bc_point_from_parts(
    beta: *const BcBeta,
    p_num: i64,
    p_den: i64,
    q_num: i64,
    q_den: i64,
    out: *mut *mut BcPoint,
) -> BcStatus {
    guard(|| {
        let beta = deref(beta, "beta")?;
        let (p, q) = (rational(p_num, p_den)?, rational(q_num, q_den)?);
        write_out(out, Box::into_raw(Box::new(BcPoint(beta.0.point_from_parts(&p, &q)))), "out")
    })
}

/// # Safety
/// `point` must come from `bc_point_from_*` and not be freed twice. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn bc_point_free(point: *mut BcPoint) {
    if !point.is_null() {
        drop(Box::from_raw(point));
    }
}

/// # Safety
/// `point` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_point_to_f64(point: *const BcPoint) -> f64 {
    point.as_ref().map_or(f64::NAN, |p| p.0.to_f64())
}

/// `N_n(x; β)` and whether any partial sum came within the tolerance of a
/// window endpoint. `n` is capped at 30 so the count fits in 64 bits.
///
/// # Safety
/// Handles must be live; `count` and `near_boundary` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bc_count_prefixes(
    beta: *const BcBeta,
    x: *const BcPoint,
    n: u32,
    count: *mut u64,
    near_boundary: *mut bool,
) -> BcStatus {
    guard(|| {
        let (beta, x) = (deref(beta, "beta")?, deref(x, "x")?);
        let limits = Limits::default();
        let r = match (&beta.0, &x.0) {
            (BetaParam::Float(b), Point::Float(v)) => count_prefixes(v, n as usize, b, &limits),
            (BetaParam::Quadratic(b), Point::Quad(v)) => count_prefixes(v, n as usize, b, &limits),
            _ => Err(Error::BackendMismatch),
        }
        .map_err(fail)?;
        let c = u64::try_from(&r.count).expect("counts up to depth 30 fit in u64");
        write_out(count, c, "count")?;
        write_out(near_boundary, r.near_boundary, "near_boundary")
    })
}

fn density_of<B: Backend>(beta: &B, n: usize) -> Result<BcDensity, Error> {
    let f = iterate_f_n(beta, n, &Limits::default())?;
    let pieces = f.pieces().map(|(l, r, v)| [beta.to_f64(l), beta.to_f64(r), beta.to_f64(v)]).collect();
    Ok(BcDensity { pieces, integral: beta.to_f64(&integral(&f, beta)) })
}

/// `f_n = P^n((β-1)χ)` on `I_β`.
///
/// # Safety
/// `beta` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bc_density_new(beta: *const BcBeta, n: u32, out: *mut *mut BcDensity) -> BcStatus {
    guard(|| {
        let beta = deref(beta, "beta")?;
        let d = match &beta.0 {
            BetaParam::Float(b) => density_of(b, n as usize),
            BetaParam::Quadratic(b) => density_of(b, n as usize),
        }
        .map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(d)), "out")
    })
}

/// # Safety
/// `density` must come from `bc_density_new` and not be freed twice. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn bc_density_free(density: *mut BcDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// Number of pieces, or 0 for a null handle.
///
/// # Safety
/// `density` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_density_piece_count(density: *const BcDensity) -> usize {
    density.as_ref().map_or(0, |d| d.pieces.len())
}

/// Piece `index` as `[left, right)` with its value.
///
/// # Safety
/// `density` must be a live handle; the out pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bc_density_piece(
    density: *const BcDensity,
    index: usize,
    left: *mut f64,
    right: *mut f64,
    value: *mut f64,
) -> BcStatus {
    guard(|| {
        let d = deref(density, "density")?;
        let [l, r, v] = *d.pieces.get(index).ok_or_else(|| {
            fail(Error::InvalidParams(format!("piece {index} of {}", d.pieces.len())))
        })?;
        write_out(left, l, "left")?;
        write_out(right, r, "right")?;
        write_out(value, v, "value")
    })
}

/// `∫ f_n`, evaluated in the backend and then rounded.
///
/// # Safety
/// `density` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_density_integral(density: *const BcDensity) -> f64 {
    density.as_ref().map_or(f64::NAN, |d| d.integral)
}

/// Shannon entropy (nats) of the uniform measure on the `2^n` sums, with the
/// number of distinct atoms.
///
/// # Safety
/// `beta` must be a live handle; `entropy` and `atoms` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bc_garsia_entropy(
    beta: *const BcBeta,
    n: u32,
    entropy: *mut f64,
    atoms: *mut u64,
) -> BcStatus {
    guard(|| {
        let beta = deref(beta, "beta")?;
        let limits = Limits::default();
        let level = match &beta.0 {
            BetaParam::Float(b) => level_entropy(b, n as usize, &limits),
            BetaParam::Quadratic(b) => level_entropy(b, n as usize, &limits),
        }
        .map_err(fail)?;
        write_out(entropy, level.entropy, "entropy")?;
        write_out(atoms, level.distinct_atoms, "atoms")
    })
}

/// Monte-Carlo frequency of the switch region, seeded and reproducible.
///
/// # Safety
/// `beta` must be a live handle; `estimate` and `std_error` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bc_estimate_mu_s(
    beta: *const BcBeta,
    orbits: u64,
    steps: u64,
    burn_in: u64,
    seed: u64,
    estimate: *mut f64,
    std_error: *mut f64,
) -> BcStatus {
    guard(|| {
        let beta = deref(beta, "beta")?;
        let params = McParams { orbits: orbits as usize, steps: steps as usize, burn_in: burn_in as usize, seed };
        let est = match &beta.0 {
            BetaParam::Float(b) => estimate_mu_s(b, &params),
            BetaParam::Quadratic(b) => estimate_mu_s(b, &params),
        }
        .map_err(fail)?;
        write_out(estimate, est.estimate, "estimate")?;
        write_out(std_error, est.std_error, "std_error")
    })
}
