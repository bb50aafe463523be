//! C ABI for `selfdist`.
//!
//! Objects cross the boundary as opaque handles (`SdNorm`, `SdMeasure`,
//! `SdCovering`) created by `sd_*_new`/`sd_*_from_json` constructors and
//! released with the matching `sd_*_free`. Every fallible call returns an
//! [`SdStatus`] and writes results through out-pointers; on failure a
//! description is available from [`sd_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use selfdist::bounds::{self, Ratio, ThetaVariant};
use selfdist::covering::{self, Covering, VerifyMode};
use selfdist::measures::{self, DiscreteMeasure, SamplerMethod, SamplerSpec};
use selfdist::norms::NormSpec;
use selfdist::{delta, optimize, Error};

/// Result code of every fallible call. Values 2 to 4 match the exit codes of
/// the command-line tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    CertificateInvalid = 4,
    Panic = 5,
}

pub const SD_THETA_EQ1: u32 = 1;
pub const SD_THETA_EQ2: u32 = 2;
pub const SD_THETA_EQ3: u32 = 3;
pub const SD_THETA_EQ4: u32 = 4;

pub const SD_RATIO_OPTIMAL: u32 = 0;
pub const SD_RATIO_SIMPLIFIED: u32 = 1;

pub const SD_SAMPLER_VERTEX: u32 = 0;
pub const SD_SAMPLER_BALL: u32 = 1;
pub const SD_SAMPLER_BOUNDARY: u32 = 2;

/// Opaque norm handle.
pub struct SdNorm(NormSpec);

/// Opaque measure handle.
pub struct SdMeasure(DiscreteMeasure);

/// Opaque covering handle.
pub struct SdCovering(Covering);

/// Value of a Monte Carlo or exact self-distance evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SdDeltaEstimate {
    pub value: f64,
    /// Standard error; named to avoid the `stderr` macro of `<stdio.h>`.
    pub std_error: f64,
    pub samples: u64,
}

/// Outcome of a covering verification.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SdVerifyResult {
    pub verified: bool,
    pub points_checked: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SdStatus {
    match err.exit_code() {
        3 => SdStatus::Domain,
        4 => SdStatus::CertificateInvalid,
        _ => SdStatus::InvalidInput,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F>(f: F) -> SdStatus
where
    F: FnOnce() -> Result<(), FfiError>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SdStatus::Ok,
        Ok(Err(FfiError::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            SdStatus::NullPointer
        }
        Ok(Err(FfiError::Lib(e))) => {
            let status = status_of(&e);
            set_error(e.to_string());
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SdStatus::Panic
        }
    }
}

enum FfiError {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for FfiError {
    fn from(e: Error) -> Self {
        FfiError::Lib(e)
    }
}

fn input(msg: impl Into<String>) -> FfiError {
    FfiError::Lib(Error::InvalidInput(msg.into()))
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, FfiError> {
    p.as_ref().ok_or(FfiError::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], FfiError> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(FfiError::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), FfiError> {
    if out.is_null() {
        return Err(FfiError::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| input(format!("{what} is not valid UTF-8")))
}

unsafe fn rows(data: *const f64, count: usize, dim: usize, what: &'static str) -> Result<Vec<Vec<f64>>, FfiError> {
    let len = count.checked_mul(dim).ok_or_else(|| input("size overflow"))?;
    Ok(slice(data, len, what)?.chunks(dim.max(1)).map(<[f64]>::to_vec).collect())
}

fn variant(v: u32) -> Result<ThetaVariant, FfiError> {
    match v {
        SD_THETA_EQ1 => Ok(ThetaVariant::Eq1Optimized),
        SD_THETA_EQ2 => Ok(ThetaVariant::Eq2Explicit),
        SD_THETA_EQ3 => Ok(ThetaVariant::Eq3),
        SD_THETA_EQ4 => Ok(ThetaVariant::Eq4),
        other => Err(input(format!("unknown theta variant {other}"))),
    }
}

fn ratio(r: u32) -> Result<Ratio, FfiError> {
    match r {
        SD_RATIO_OPTIMAL => Ok(Ratio::Optimal),
        SD_RATIO_SIMPLIFIED => Ok(Ratio::Simplified),
        other => Err(input(format!("unknown ratio choice {other}"))),
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer returned by a `*_json` function of this
/// library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn sd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn json_out<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> Result<(), FfiError> {
    let s = serde_json::to_string(value).map_err(|e| FfiError::Lib(e.into()))?;
    let c = CString::new(s).map_err(|_| input("interior NUL in JSON"))?;
    unsafe { write(out, c.into_raw(), "out") }
}

// ---------------------------------------------------------------- norms

/// Parses a norm from its JSON form, e.g. `{"dim":2,"kind":{"lp":"inf"}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_norm_from_json(json: *const c_char, out: *mut *mut SdNorm) -> SdStatus {
    guard(|| {
        let ns: NormSpec = serde_json::from_str(c_str(json, "json")?).map_err(Error::from)?;
        write(out, Box::into_raw(Box::new(SdNorm(ns))), "out")
    })
}

/// `ℓp` norm on `R^dim`; `p = INFINITY` gives the maximum norm.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_norm_lp(dim: usize, p: f64, out: *mut *mut SdNorm) -> SdStatus {
    guard(|| {
        let ns = NormSpec::lp(dim, p)?;
        write(out, Box::into_raw(Box::new(SdNorm(ns))), "out")
    })
}

/// Polytopal norm `max_k |⟨a_k, x⟩|`; `functionals` holds `count` rows of
/// length `dim`, row-major.
///
/// # Safety
/// `functionals` must point to `count * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_norm_polytopal(
    dim: usize,
    functionals: *const f64,
    count: usize,
    out: *mut *mut SdNorm,
) -> SdStatus {
    guard(|| {
        let ns = NormSpec::polytopal(dim, rows(functionals, count, dim, "functionals")?)?;
        write(out, Box::into_raw(Box::new(SdNorm(ns))), "out")
    })
}

/// # Safety
/// `norm` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn sd_norm_free(norm: *mut SdNorm) {
    if !norm.is_null() {
        drop(Box::from_raw(norm));
    }
}

/// # Safety
/// `norm` must be a live handle; `x` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sd_norm_eval(norm: *const SdNorm, x: *const f64, len: usize, out: *mut f64) -> SdStatus {
    guard(|| {
        let ns = &deref(norm, "norm")?.0;
        write(out, ns.eval(slice(x, len, "x")?)?, "out")
    })
}

// ------------------------------------------------------------- measures

/// Discrete measure with `count` atoms of dimension `dim` (row-major) and
/// the given weights.
///
/// # Safety
/// `atoms` must point to `count * dim` doubles and `weights` to `count`.
#[no_mangle]
pub unsafe extern "C" fn sd_measure_new(
    atoms: *const f64,
    weights: *const f64,
    count: usize,
    dim: usize,
    out: *mut *mut SdMeasure,
) -> SdStatus {
    guard(|| {
        let atoms = rows(atoms, count, dim, "atoms")?;
        let weights = slice(weights, count, "weights")?.to_vec();
        let m = DiscreteMeasure::new(atoms, weights)?;
        write(out, Box::into_raw(Box::new(SdMeasure(m))), "out")
    })
}

/// Parses `{"atoms": [[...], ...], "weights": [...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_measure_from_json(json: *const c_char, out: *mut *mut SdMeasure) -> SdStatus {
    guard(|| {
        let m: DiscreteMeasure = serde_json::from_str(c_str(json, "json")?).map_err(Error::from)?;
        write(out, Box::into_raw(Box::new(SdMeasure(m))), "out")
    })
}

/// Uniform measure on the `2^n` vertices of the cube.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_measure_uniform_vertex(n: usize, out: *mut *mut SdMeasure) -> SdStatus {
    guard(|| {
        let m = measures::uniform_vertex_measure(n)?;
        write(out, Box::into_raw(Box::new(SdMeasure(m))), "out")
    })
}

/// Number of atoms after merging duplicates; 0 for NULL.
///
/// # Safety
/// `measure` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_measure_len(measure: *const SdMeasure) -> usize {
    measure.as_ref().map_or(0, |m| m.0.len())
}

/// # Safety
/// `measure` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn sd_measure_free(measure: *mut SdMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

// ---------------------------------------------------------------- delta

/// Exact self-distance of a discrete measure.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_delta_discrete(
    norm: *const SdNorm,
    measure: *const SdMeasure,
    out: *mut f64,
) -> SdStatus {
    guard(|| {
        let d = delta::delta_discrete(&deref(norm, "norm")?.0, &deref(measure, "measure")?.0)?;
        write(out, d.value, "out")
    })
}

/// Monte Carlo self-distance of a sampled measure (`SD_SAMPLER_*`).
///
/// # Safety
/// `norm` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_delta_monte_carlo(
    norm: *const SdNorm,
    sampler: u32,
    seed: u64,
    pairs: u64,
    out: *mut SdDeltaEstimate,
) -> SdStatus {
    guard(|| {
        let method = match sampler {
            SD_SAMPLER_VERTEX => SamplerMethod::Vertex,
            SD_SAMPLER_BALL => SamplerMethod::Ball,
            SD_SAMPLER_BOUNDARY => SamplerMethod::Boundary,
            other => return Err(input(format!("unknown sampler {other}"))),
        };
        let spec = SamplerSpec::new(deref(norm, "norm")?.0.clone(), method, seed)?;
        let d = delta::delta_monte_carlo(&spec, pairs)?;
        write(out, SdDeltaEstimate { value: d.value, std_error: d.stderr, samples: d.samples }, "out")
    })
}

// --------------------------------------------------------------- bounds

/// Covering-density bound `Θ_n` (`SD_THETA_*`), `n ≥ 3`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_theta_n(n: u64, theta: u32, out: *mut f64) -> SdStatus {
    guard(|| write(out, bounds::theta_n(n, variant(theta)?)?, "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_covering_bound_generic(s: u64, r: f64, out: *mut f64) -> SdStatus {
    guard(|| write(out, bounds::covering_bound_generic(s, r)?, "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_fixed_point_bound(s: u64, r: f64, out: *mut f64) -> SdStatus {
    guard(|| write(out, bounds::fixed_point_bound(s, r)?, "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_optimal_r(n: u64, out: *mut f64) -> SdStatus {
    guard(|| write(out, bounds::optimal_r(n)?, "out"))
}

/// Value of the `n ≥ 3` bound for a density variant and ratio choice.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_bound_highdim(n: u64, theta: u32, ratio_choice: u32, out: *mut f64) -> SdStatus {
    guard(|| write(out, bounds::bound_highdim(n, variant(theta)?, ratio(ratio_choice)?)?.value, "out"))
}

/// Full JSON report of the `n ≥ 3` bound; free with [`sd_string_free`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_bound_highdim_json(
    n: u64,
    theta: u32,
    ratio_choice: u32,
    out: *mut *mut c_char,
) -> SdStatus {
    guard(|| json_out(&bounds::bound_highdim(n, variant(theta)?, ratio(ratio_choice)?)?, out))
}

/// `f(n)` with `Δ ≤ 2(1 − 2^{−n} f(n))`, `n ≥ 2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_f_of_n(n: u64, theta: u32, out: *mut f64) -> SdStatus {
    guard(|| write(out, bounds::f_of_n(n, variant(theta)?)?, "out"))
}

// ------------------------------------------------------------- covering

/// Parses `{"norm": {...}, "ratio": r, "centers": [[...], ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_covering_from_json(json: *const c_char, out: *mut *mut SdCovering) -> SdStatus {
    guard(|| {
        let c: Covering = serde_json::from_str(c_str(json, "json")?).map_err(Error::from)?;
        write(out, Box::into_raw(Box::new(SdCovering(c))), "out")
    })
}

/// The maximum-norm ball cut into `2^n` half-size cubes.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_cube_cover(n: usize, out: *mut *mut SdCovering) -> SdStatus {
    guard(|| write(out, Box::into_raw(Box::new(SdCovering(covering::cube_cover(n)?))), "out"))
}

/// # Safety
/// `cover` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn sd_covering_free(cover: *mut SdCovering) {
    if !cover.is_null() {
        drop(Box::from_raw(cover));
    }
}

/// Grid verification at the given spacing.
///
/// # Safety
/// `cover` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_verify_cover_grid(
    cover: *const SdCovering,
    resolution: f64,
    out: *mut SdVerifyResult,
) -> SdStatus {
    guard(|| {
        let r = covering::verify_cover(&deref(cover, "cover")?.0, VerifyMode::Grid { resolution })?;
        write(out, SdVerifyResult { verified: r.verified, points_checked: r.points_checked }, "out")
    })
}

/// Bound certified by `cover` for `measure`; fails with
/// `CertificateInvalid` when an atom lies in no homothet.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_certified_bound(
    cover: *const SdCovering,
    measure: *const SdMeasure,
    out: *mut f64,
) -> SdStatus {
    guard(|| {
        let rep = covering::certified_bound(&deref(cover, "cover")?.0, &deref(measure, "measure")?.0)?;
        write(out, rep.value, "out")
    })
}

// ------------------------------------------------------------- optimize

/// Maximizes the self-distance over weights of `count` atoms (row-major,
/// length `dim` each). Writes `count` weights and the optimal value.
///
/// # Safety
/// `atoms` must point to `count * norm.dim` doubles, `weights_out` to room
/// for `count` doubles; `value_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_maximize_weights(
    norm: *const SdNorm,
    atoms: *const f64,
    count: usize,
    restarts: u64,
    max_iters: u64,
    seed: u64,
    weights_out: *mut f64,
    value_out: *mut f64,
) -> SdStatus {
    guard(|| {
        let ns = &deref(norm, "norm")?.0;
        let atoms = rows(atoms, count, ns.dim(), "atoms")?;
        let r = optimize::maximize_weights(ns, &atoms, restarts, max_iters, seed)?;
        if r.best_measure.len() != count {
            return Err(input("atoms must be pairwise distinct"));
        }
        if weights_out.is_null() {
            return Err(FfiError::Null("weights_out"));
        }
        std::slice::from_raw_parts_mut(weights_out, count).copy_from_slice(r.best_measure.weights());
        write(value_out, r.best_value, "value_out")
    })
}
