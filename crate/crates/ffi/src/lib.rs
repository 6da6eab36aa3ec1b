//! C ABI over `gauss-semigroup`.
//!
//! Every fallible call returns a [`GsStatus`] and writes its result through an
//! out pointer. On failure the message is available from
//! [`gs_last_error_message`] on the same thread. Handles are opaque and must
//! be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use libc::{c_char, c_double, c_int, size_t};

use gauss_semigroup::cones::{cone_contains, ConeKind, ConeSpec};
use gauss_semigroup::config::QuadratureConfig;
use gauss_semigroup::error::Error;
use gauss_semigroup::experiments::lookup;
use gauss_semigroup::hermite::{hermite_eval, FunctionRep, HermiteSeries, MultiIndex};
use gauss_semigroup::measure::gaussian_density;
use gauss_semigroup::ou::{ou_apply, ou_apply_change_of_var, ou_apply_kernel, ou_apply_spectral};
use gauss_semigroup::poisson::{
    poisson_apply, poisson_apply_kernel, poisson_apply_spectral, poisson_apply_subordination,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonFinite = 3,
    Config = 4,
    Io = 5,
    Utf8 = 6,
    Panic = 7,
}

/// Values accepted by the `route` argument of [`gs_ou_apply`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsOuRoute {
    Auto = 0,
    Kernel = 1,
    ChangeOfVar = 2,
    Spectral = 3,
}

/// Values accepted by the `route` argument of [`gs_poisson_apply`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsPoissonRoute {
    Auto = 0,
    Kernel = 1,
    Subordination = 2,
    Spectral = 3,
}

/// Values accepted by the `kind` argument of [`gs_cone_contains`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsConeKind {
    ParabolicGaussian = 0,
    Gaussian = 1,
    TruncatedParabolic = 2,
}

/// Quadrature settings.
pub struct GsConfig {
    inner: QuadratureConfig,
}

/// A function on `R^d`, either a catalog entry or a Hermite series.
pub struct GsFunction {
    inner: FunctionRep,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GsStatus {
    match e {
        Error::Argument(_) => GsStatus::InvalidArgument,
        Error::NonFinite { .. } => GsStatus::NonFinite,
        Error::Config { .. } => GsStatus::Config,
        Error::Io(_) => GsStatus::Io,
    }
}

struct Fail(GsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside gauss-semigroup".into());
            GsStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(GsStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn read<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn bad(msg: impl Into<String>) -> Fail {
    Fail(GsStatus::InvalidArgument, msg.into())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New config with default quadrature settings. Free with [`gs_config_free`].
#[no_mangle]
pub extern "C" fn gs_config_new() -> *mut GsConfig {
    Box::into_raw(Box::new(GsConfig {
        inner: QuadratureConfig::default(),
    }))
}

/// # Safety
/// `cfg` is null or a pointer from [`gs_config_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_config_free(cfg: *mut GsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Sets the Gauss-Hermite nodes per axis.
///
/// # Safety
/// `cfg` is a live handle from [`gs_config_new`].
#[no_mangle]
pub unsafe extern "C" fn gs_config_set_gh_nodes(cfg: *mut GsConfig, nodes: size_t) -> GsStatus {
    guard(|| {
        let cfg = out(cfg, "cfg")?;
        let mut next = cfg.inner.clone();
        next.gh_nodes = nodes;
        next.validate()?;
        cfg.inner = next;
        Ok(())
    })
}

/// Sets the seed used by Monte Carlo fallbacks.
///
/// # Safety
/// `cfg` is a live handle from [`gs_config_new`].
#[no_mangle]
pub unsafe extern "C" fn gs_config_set_seed(cfg: *mut GsConfig, seed: u64) -> GsStatus {
    guard(|| {
        out(cfg, "cfg")?.inner.seed = seed;
        Ok(())
    })
}

/// Catalog entry `name` in dimension `dim`.
///
/// # Safety
/// `name` is a NUL-terminated string, `cfg` a live config handle and `result`
/// a writable pointer. On success `*result` owns a handle to be released with
/// [`gs_function_free`].
#[no_mangle]
pub unsafe extern "C" fn gs_function_catalog(
    dim: size_t,
    name: *const c_char,
    cfg: *const GsConfig,
    result: *mut *mut GsFunction,
) -> GsStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| Fail(GsStatus::Utf8, "`name` is not UTF-8".into()))?;
        let cfg = handle(cfg, "cfg")?;
        let slot = out(result, "result")?;
        let entry = lookup(dim, name, &cfg.inner)?;
        *slot = Box::into_raw(Box::new(GsFunction { inner: entry.rep }));
        Ok(())
    })
}

/// Hermite series `sum_k coeffs[k] h_{beta_k}` with `beta_k` stored row-major
/// in `betas[k * dim .. (k + 1) * dim]`.
///
/// # Safety
/// `betas` holds `count * dim` values, `coeffs` holds `count` values and
/// `result` is writable.
#[no_mangle]
pub unsafe extern "C" fn gs_function_series(
    dim: size_t,
    betas: *const u32,
    coeffs: *const c_double,
    count: size_t,
    result: *mut *mut GsFunction,
) -> GsStatus {
    guard(|| {
        let b = read(betas, count * dim, "betas")?;
        let c = read(coeffs, count, "coeffs")?;
        let slot = out(result, "result")?;
        let mut terms = Vec::with_capacity(count);
        for k in 0..count {
            let beta = if dim == 0 {
                return Err(bad("dimension must be >= 1"));
            } else {
                MultiIndex::new(b[k * dim..(k + 1) * dim].to_vec())?
            };
            terms.push((beta, c[k]));
        }
        let s = HermiteSeries::from_terms(dim, terms)?;
        *slot = Box::into_raw(Box::new(GsFunction { inner: s.into() }));
        Ok(())
    })
}

/// # Safety
/// `f` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_function_free(f: *mut GsFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` is a live handle, `x` holds `dim` values and `result` is writable.
#[no_mangle]
pub unsafe extern "C" fn gs_function_eval(
    f: *const GsFunction,
    x: *const c_double,
    dim: size_t,
    result: *mut c_double,
) -> GsStatus {
    guard(|| {
        let f = handle(f, "f")?;
        let x = read(x, dim, "x")?;
        *out(result, "result")? = f.inner.eval(x)?;
        Ok(())
    })
}

/// Normalized Hermite polynomial `h_beta(x)`.
///
/// # Safety
/// `beta` and `x` hold `dim` values each and `result` is writable.
#[no_mangle]
pub unsafe extern "C" fn gs_hermite_eval(
    beta: *const u32,
    x: *const c_double,
    dim: size_t,
    result: *mut c_double,
) -> GsStatus {
    guard(|| {
        let beta = MultiIndex::new(read(beta, dim, "beta")?.to_vec())?;
        let x = read(x, dim, "x")?;
        *out(result, "result")? = hermite_eval(&beta, x)?;
        Ok(())
    })
}

/// Ornstein-Uhlenbeck `T_t f(x)`; `route` takes a [`GsOuRoute`] value.
///
/// # Safety
/// `f` and `cfg` are live handles, `x` holds `dim` values and `result` is
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gs_ou_apply(
    f: *const GsFunction,
    cfg: *const GsConfig,
    x: *const c_double,
    dim: size_t,
    t: c_double,
    route: c_int,
    result: *mut c_double,
) -> GsStatus {
    guard(|| {
        let f = &handle(f, "f")?.inner;
        let q = &handle(cfg, "cfg")?.inner;
        let x = read(x, dim, "x")?;
        let slot = out(result, "result")?;
        *slot = match route {
            r if r == GsOuRoute::Auto as c_int => ou_apply(f, x, t, q)?,
            r if r == GsOuRoute::Kernel as c_int => ou_apply_kernel(f, x, t, q)?,
            r if r == GsOuRoute::ChangeOfVar as c_int => ou_apply_change_of_var(f, x, t, q)?,
            r if r == GsOuRoute::Spectral as c_int => {
                let s = f.as_series().ok_or_else(|| bad("spectral route needs a series"))?;
                ou_apply_spectral(s, x, t)?
            }
            other => return Err(bad(format!("unknown OU route {other}"))),
        };
        Ok(())
    })
}

/// Poisson-Hermite `P_t f(x)`; `route` takes a [`GsPoissonRoute`] value.
///
/// # Safety
/// As for [`gs_ou_apply`].
#[no_mangle]
pub unsafe extern "C" fn gs_poisson_apply(
    f: *const GsFunction,
    cfg: *const GsConfig,
    x: *const c_double,
    dim: size_t,
    t: c_double,
    route: c_int,
    result: *mut c_double,
) -> GsStatus {
    guard(|| {
        let f = &handle(f, "f")?.inner;
        let q = &handle(cfg, "cfg")?.inner;
        let x = read(x, dim, "x")?;
        let slot = out(result, "result")?;
        *slot = match route {
            r if r == GsPoissonRoute::Auto as c_int => poisson_apply(f, x, t, q)?,
            r if r == GsPoissonRoute::Kernel as c_int => poisson_apply_kernel(f, x, t, q)?,
            r if r == GsPoissonRoute::Subordination as c_int => poisson_apply_subordination(f, x, t, q)?,
            r if r == GsPoissonRoute::Spectral as c_int => {
                let s = f.as_series().ok_or_else(|| bad("spectral route needs a series"))?;
                poisson_apply_spectral(s, x, t)?
            }
            other => return Err(bad(format!("unknown Poisson route {other}"))),
        };
        Ok(())
    })
}

/// Whether `(y, t)` lies in the cone of `kind` (a [`GsConeKind`] value)
/// with vertex `apex`.
///
/// # Safety
/// `apex` and `y` hold `dim` values each and `result` is writable.
#[no_mangle]
pub unsafe extern "C" fn gs_cone_contains(
    kind: c_int,
    apex: *const c_double,
    y: *const c_double,
    dim: size_t,
    t: c_double,
    result: *mut bool,
) -> GsStatus {
    guard(|| {
        let kind = match kind {
            k if k == GsConeKind::ParabolicGaussian as c_int => ConeKind::ParabolicGaussian,
            k if k == GsConeKind::Gaussian as c_int => ConeKind::Gaussian,
            k if k == GsConeKind::TruncatedParabolic as c_int => ConeKind::TruncatedParabolic,
            other => return Err(bad(format!("unknown cone kind {other}"))),
        };
        let spec = ConeSpec::new(read(apex, dim, "apex")?.to_vec(), kind)?;
        let y = read(y, dim, "y")?;
        if y.len() != spec.dim() {
            return Err(bad("dimension mismatch"));
        }
        *out(result, "result")? = cone_contains(&spec, y, t);
        Ok(())
    })
}

/// Density of `gamma_d` at `x`; NaN when `x` is null with `dim > 0`.
///
/// # Safety
/// `x` holds `dim` values.
#[no_mangle]
pub unsafe extern "C" fn gs_gaussian_density(x: *const c_double, dim: size_t) -> c_double {
    match read(x, dim, "x") {
        Ok(x) => gaussian_density(x),
        Err(Fail(_, msg)) => {
            set_error(msg);
            f64::NAN
        }
    }
}
