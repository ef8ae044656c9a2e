//! C ABI over `bergman`.
//!
//! Domains and estimators are opaque heap handles created by `*_new` /
//! `*_from_json` and released with the matching `*_free`. Every fallible call
//! returns a [`BgStatus`]; on failure `bg_last_error_message` describes the
//! error for the calling thread. Points and directions are arrays of
//! [`BgComplex`] of length `n`, which must equal the domain dimension.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bergman::harness::{Backend, Estimator, EstimatorConfig};
use bergman::quadrature::{DEFAULT_QMC_CANDIDATES, DEFAULT_SEED};
use bergman::{model, BergmanError, ComplexPoint, ComplexVector, Domain};
use num_complex::Complex64;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDomain = 3,
    NotInterior = 4,
    Unsupported = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgBackend {
    Auto = 0,
    Closed = 1,
    Numeric = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgComplex {
    pub re: f64,
    pub im: f64,
}

/// Kernel, extremal derivative and metric at one `(z, X)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BgMetric {
    pub k: f64,
    pub m: f64,
    pub b: f64,
    /// Quadrature standard errors; zero for closed forms and exact rules.
    pub k_error: f64,
    pub b_error: f64,
    /// 1 when numeric parts agree between degrees `d - 2` and `d`.
    pub converged: i32,
    /// Basis degree of numeric parts, or -1 for closed forms.
    pub degree: i32,
}

/// Opaque domain handle.
pub struct BgDomain(Domain);

/// Opaque estimator handle.
pub struct BgEstimator(Estimator);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &BergmanError) -> BgStatus {
    match e {
        BergmanError::InvalidDomain(_) | BergmanError::Unbounded => BgStatus::InvalidDomain,
        BergmanError::NotInterior | BergmanError::NotOnBoundary => BgStatus::NotInterior,
        BergmanError::Unsupported(_) | BergmanError::UnsupportedDimension(_) => BgStatus::Unsupported,
        BergmanError::Numerical(_) | BergmanError::NonFinite | BergmanError::FlatValidation(_) => BgStatus::Numerical,
        _ => BgStatus::InvalidArgument,
    }
}

enum Failure {
    Null,
    Core(BergmanError),
}

impl From<BergmanError> for Failure {
    fn from(e: BergmanError) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BgStatus::Ok,
        Ok(Err(Failure::Null)) => {
            set_error("null pointer argument");
            BgStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            BgStatus::Panic
        }
    }
}

unsafe fn coords(p: *const BgComplex, n: usize) -> Result<Vec<Complex64>, Failure> {
    if p.is_null() {
        return Err(Failure::Null);
    }
    let s = std::slice::from_raw_parts(p, n);
    Ok(s.iter().map(|c| Complex64::new(c.re, c.im)).collect())
}

unsafe fn domain_ref<'a>(d: *const BgDomain) -> Result<&'a Domain, Failure> {
    d.as_ref().map(|d| &d.0).ok_or(Failure::Null)
}

fn metric_out(k: f64, m: f64, b: f64) -> BgMetric {
    BgMetric {
        k,
        m,
        b,
        converged: 1,
        degree: -1,
        ..Default::default()
    }
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn bg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON domain description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bg_domain_from_json(json: *const c_char, out: *mut *mut BgDomain) -> BgStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return Err(Failure::Null);
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| BergmanError::InvalidDomain("domain JSON is not UTF-8".into()))?;
        let d = Domain::from_json(text)?;
        *out = Box::into_raw(Box::new(BgDomain(d)));
        Ok(())
    })
}

/// # Safety
/// `d` must come from `bg_domain_from_json` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bg_domain_free(d: *mut BgDomain) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Complex dimension, or 0 for a null handle.
///
/// # Safety
/// `d` must be null or a live domain handle.
#[no_mangle]
pub unsafe extern "C" fn bg_domain_dim(d: *const BgDomain) -> usize {
    d.as_ref().map_or(0, |d| d.0.dim())
}

/// Euclidean distance from an interior point to the boundary.
///
/// # Safety
/// `z` must point to `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bg_domain_boundary_distance(
    d: *const BgDomain,
    z: *const BgComplex,
    n: usize,
    out: *mut f64,
) -> BgStatus {
    guard(|| {
        let d = domain_ref(d)?;
        let z = ComplexPoint::new(coords(z, n)?)?;
        let v = d.boundary_distance(&z)?;
        *out.as_mut().ok_or(Failure::Null)? = v;
        Ok(())
    })
}

/// Largest `r` with `z + lambda X` inside for `|lambda| < r` (infinite when unbounded).
///
/// # Safety
/// `z` and `x` must point to `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bg_domain_directional_radius(
    d: *const BgDomain,
    z: *const BgComplex,
    x: *const BgComplex,
    n: usize,
    out: *mut f64,
) -> BgStatus {
    guard(|| {
        let d = domain_ref(d)?;
        let z = ComplexPoint::new(coords(z, n)?)?;
        let x = ComplexVector::new(coords(x, n)?)?;
        let v = d.directional_radius(&z, &x)?;
        *out.as_mut().ok_or(Failure::Null)? = v;
        Ok(())
    })
}

/// Closed-form kernel `K(z)`.
///
/// # Safety
/// `z` must point to `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bg_kernel_closed(
    d: *const BgDomain,
    z: *const BgComplex,
    n: usize,
    out: *mut f64,
) -> BgStatus {
    guard(|| {
        let d = domain_ref(d)?;
        let z = ComplexPoint::new(coords(z, n)?)?;
        let v = model::kernel_closed(d, &z)?;
        *out.as_mut().ok_or(Failure::Null)? = v.k;
        Ok(())
    })
}

/// Closed-form `K`, `M` and `B`.
///
/// # Safety
/// `z` and `x` must point to `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bg_metric_closed(
    d: *const BgDomain,
    z: *const BgComplex,
    x: *const BgComplex,
    n: usize,
    out: *mut BgMetric,
) -> BgStatus {
    guard(|| {
        let d = domain_ref(d)?;
        let z = ComplexPoint::new(coords(z, n)?)?;
        let x = ComplexVector::new(coords(x, n)?)?;
        let v = model::metric_closed(d, &z, &x)?;
        *out.as_mut().ok_or(Failure::Null)? = metric_out(v.k, v.m, v.b);
        Ok(())
    })
}

/// Builds an estimator. `degree < 0` selects the dimension cap, `candidates == 0`
/// the default qmc budget. The domain handle may be freed afterwards.
///
/// # Safety
/// `d` must be a live domain handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bg_estimator_new(
    d: *const BgDomain,
    backend: BgBackend,
    degree: i32,
    candidates: usize,
    seed: u64,
    out: *mut *mut BgEstimator,
) -> BgStatus {
    guard(|| {
        let d = domain_ref(d)?;
        if out.is_null() {
            return Err(Failure::Null);
        }
        let config = EstimatorConfig {
            backend: match backend {
                BgBackend::Auto => Backend::Auto,
                BgBackend::Closed => Backend::Closed,
                BgBackend::Numeric => Backend::Numeric,
            },
            degree: usize::try_from(degree).ok(),
            qmc_candidates: if candidates == 0 {
                DEFAULT_QMC_CANDIDATES
            } else {
                candidates
            },
            seed: if seed == 0 { DEFAULT_SEED } else { seed },
        };
        let e = Estimator::new(d, &config)?;
        *out = Box::into_raw(Box::new(BgEstimator(e)));
        Ok(())
    })
}

/// `K`, `M`, `B` at `(z, X)`. Safe to call concurrently on one handle.
///
/// # Safety
/// `z` and `x` must point to `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bg_estimator_metric(
    e: *const BgEstimator,
    z: *const BgComplex,
    x: *const BgComplex,
    n: usize,
    out: *mut BgMetric,
) -> BgStatus {
    guard(|| {
        let e = &e.as_ref().ok_or(Failure::Null)?.0;
        let z = ComplexPoint::new(coords(z, n)?)?;
        let x = ComplexVector::new(coords(x, n)?)?;
        let s = e.estimate(&z, &x)?;
        *out.as_mut().ok_or(Failure::Null)? = BgMetric {
            k: s.k,
            m: s.m,
            b: s.b,
            k_error: s.k_error,
            b_error: s.b_error,
            converged: s.converged as i32,
            degree: s.degree.map_or(-1, |d| d as i32),
        };
        Ok(())
    })
}

/// # Safety
/// `e` must come from `bg_estimator_new` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bg_estimator_free(e: *mut BgEstimator) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}
