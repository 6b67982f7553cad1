//! C ABI over the `bitstuff` crate.
//!
//! Objects are opaque handles created by `bs_*_new` and released by the
//! matching `bs_*_free`. Every fallible call returns a [`BsStatus`]; on
//! failure [`bs_last_error`] gives a message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bitstuff::bounds::{self, BoundsOptions};
use bitstuff::constraint::{parse_constraint_source, Constraint};
use bitstuff::encoder::{parse_encoder, BitStuffer, SampleArray, SeedRecord};
use bitstuff::{Error, ErrorKind};

/// Status codes; 2 to 5 match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BsStatus {
    Ok = 0,
    /// Null pointer, invalid UTF-8, or an output buffer that is too small.
    InvalidArgument = 1,
    Parse = 2,
    Validation = 3,
    SizeCap = 4,
    Solver = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

impl From<ErrorKind> for BsStatus {
    fn from(k: ErrorKind) -> Self {
        match k {
            ErrorKind::Parse => BsStatus::Parse,
            ErrorKind::Validation => BsStatus::Validation,
            ErrorKind::SizeCap => BsStatus::SizeCap,
            ErrorKind::Solver => BsStatus::Solver,
        }
    }
}

/// A constraint (forbidden-pattern system).
pub struct BsConstraint(Constraint);

/// A validated encoder bound to its constraint.
pub struct BsEncoder(BitStuffer);

/// LP bounds of an encoder at one geometry.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct BsBounds {
    pub lp_min: f64,
    pub lp_max: f64,
    pub vars: usize,
    pub cons: usize,
}

/// Sampled rate estimate in bits per symbol.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct BsRate {
    pub mean: f64,
    pub std_error: f64,
    pub per_interior_cell: f64,
    pub trials: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(BsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.kind.into(), e.message)
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(BsStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BsStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            BsStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| invalid(format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| invalid(format!("{what} is null")))
}

/// Message of the last failure on this thread; valid until the next call
/// that fails on the same thread.
#[no_mangle]
pub extern "C" fn bs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a constraint from `builtin:<name>[:<param>]` or a definition text.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_constraint_new(source: *const c_char, out_c: *mut *mut BsConstraint) -> BsStatus {
    guard(|| {
        let slot = out(out_c, "out")?;
        *slot = ptr::null_mut();
        let c = parse_constraint_source(text(source, "source")?).map_err(Error::from)?;
        *slot = Box::into_raw(Box::new(BsConstraint(c)));
        Ok(())
    })
}

/// # Safety
/// `c` must come from [`bs_constraint_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bs_constraint_free(c: *mut BsConstraint) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Parses and validates an encoder definition against `c`.
///
/// # Safety
/// `c` must be a live constraint handle, `def` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bs_encoder_new(c: *const BsConstraint, def: *const c_char, out_e: *mut *mut BsEncoder) -> BsStatus {
    guard(|| {
        let slot = out(out_e, "out")?;
        *slot = ptr::null_mut();
        let c = &handle(c, "constraint")?.0;
        let e = parse_encoder(text(def, "encoder text")?, c).map_err(Error::from)?;
        let s = BitStuffer::new(c, &e).map_err(Error::from)?;
        *slot = Box::into_raw(Box::new(BsEncoder(s)));
        Ok(())
    })
}

/// # Safety
/// `e` must come from [`bs_encoder_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bs_encoder_free(e: *mut BsEncoder) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Solves the stationarity LP at `(r,s,t)`; `relax = 0` means unrelaxed.
///
/// # Safety
/// `e` must be a live encoder handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bs_compute_bounds(e: *const BsEncoder, r: i64, s: i64, t: i64, relax: u64, out_b: *mut BsBounds) -> BsStatus {
    guard(|| {
        let st = &handle(e, "encoder")?.0;
        let slot = out(out_b, "out")?;
        let relax = (relax > 0).then_some(relax);
        let b = bounds::compute_bounds_with(st.constraint(), st.spec(), r, s, t, relax, &BoundsOptions::default())
            .map_err(Error::from)?;
        *slot = BsBounds { lp_min: b.lp_min, lp_max: b.lp_max, vars: b.vars, cons: b.cons };
        Ok(())
    })
}

/// Mean and standard error of the rate over `trials` sampled `m×n` arrays.
///
/// # Safety
/// `e` must be a live encoder handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bs_empirical_rate(e: *const BsEncoder, m: usize, n: usize, trials: usize, seed: u64, out_r: *mut BsRate) -> BsStatus {
    guard(|| {
        let st = &handle(e, "encoder")?.0;
        let slot = out(out_r, "out")?;
        let r = st.empirical_rate(m, n, trials, seed).map_err(Error::from)?;
        *slot = BsRate { mean: r.mean, std_error: r.stderr, per_interior_cell: r.per_interior_cell(), trials: r.trials };
        Ok(())
    })
}

/// Encodes `nbits` bits (one per byte, 0 or 1) into an `m×n` array written
/// row-major to `values` (`m*n` bytes).
///
/// # Safety
/// `bits` must hold `nbits` bytes, `values` `m*n` bytes; the out pointers
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn bs_encode(
    e: *const BsEncoder,
    m: usize,
    n: usize,
    bits: *const u8,
    nbits: usize,
    values: *mut u8,
    bits_consumed: *mut usize,
    exhausted: *mut c_int,
) -> BsStatus {
    guard(|| {
        let st = &handle(e, "encoder")?.0;
        if (bits.is_null() && nbits > 0) || values.is_null() {
            return Err(invalid("null buffer"));
        }
        let input: Vec<bool> = if nbits == 0 { Vec::new() } else { std::slice::from_raw_parts(bits, nbits).iter().map(|&b| b != 0).collect() };
        let (consumed, ex) = (out(bits_consumed, "bits_consumed")?, out(exhausted, "exhausted")?);
        let res = st.encode(m, n, &input).map_err(Error::from)?;
        std::slice::from_raw_parts_mut(values, m * n).copy_from_slice(&res.array.values);
        *consumed = res.bits_consumed;
        *ex = res.exhausted as c_int;
        Ok(())
    })
}

/// Decodes a row-major `m×n` array into bits (one per byte). `nbits`
/// receives the decoded length; fails with `InvalidArgument` if it exceeds
/// `capacity`.
///
/// # Safety
/// `values` must hold `m*n` bytes and `bits` `capacity` bytes.
#[no_mangle]
pub unsafe extern "C" fn bs_decode(
    e: *const BsEncoder,
    m: usize,
    n: usize,
    values: *const u8,
    bits: *mut u8,
    capacity: usize,
    nbits: *mut usize,
) -> BsStatus {
    guard(|| {
        let st = &handle(e, "encoder")?.0;
        if values.is_null() || (bits.is_null() && capacity > 0) {
            return Err(invalid("null buffer"));
        }
        let len = out(nbits, "nbits")?;
        let arr = SampleArray { m, n, values: std::slice::from_raw_parts(values, m * n).to_vec(), seed: SeedRecord { seed: 0, stream: 0 } };
        let dec = st.decode(&arr).map_err(Error::from)?;
        *len = dec.len();
        if dec.len() > capacity {
            return Err(invalid(format!("{} bits decoded, capacity {capacity}", dec.len())));
        }
        let dst = std::slice::from_raw_parts_mut(bits, dec.len());
        for (d, b) in dst.iter_mut().zip(&dec) {
            *d = *b as u8;
        }
        Ok(())
    })
}
