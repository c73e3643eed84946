//! C ABI over `afdm_core`.
//!
//! Every function returns an [`AfdmStatus`]. On failure a message is kept per
//! thread and can be read with [`afdm_last_error_message`]. Output buffers are
//! caller-owned; grid buffers hold `n_tau * n_nu` values, τ-major.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use afdm_core::ambiguity::{ambiguity_grid_capped, ambiguity_point, check_sensing_condition};
use afdm_core::constellation::{make_constellation, SymbolVector};
use afdm_core::grid::{AmbiguityGrid, GridKind, GridSpec, DEFAULT_MAX_POINTS};
use afdm_core::harness::{analytic_grids, run_trials};
use afdm_core::metrics::{mainlobe_region, sensing_metrics};
use afdm_core::modulator::{AfdmConfig, Rational};
use afdm_core::statistics::{analytic_moments, rice_mean, RiceParams};
use afdm_core::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfdmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidOrder = 3,
    InvalidConfig = 4,
    InvalidGrid = 5,
    DimensionMismatch = 6,
    ResourceLimit = 7,
    Numeric = 8,
    RegionCoversGrid = 9,
    DegenerateGrid = 10,
    DegenerateDistribution = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

impl From<&Error> for AfdmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidOrder(_) => AfdmStatus::InvalidOrder,
            Error::InvalidConfig(_) => AfdmStatus::InvalidConfig,
            Error::InvalidGrid(_) => AfdmStatus::InvalidGrid,
            Error::Dimension { .. } => AfdmStatus::DimensionMismatch,
            Error::Resource { .. } => AfdmStatus::ResourceLimit,
            Error::Numeric(_) => AfdmStatus::Numeric,
            Error::RegionCoversGrid => AfdmStatus::RegionCoversGrid,
            Error::DegenerateGrid => AfdmStatus::DegenerateGrid,
            Error::DegenerateDistribution => AfdmStatus::DegenerateDistribution,
            _ => AfdmStatus::InvalidArgument,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AfdmComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for AfdmComplex {
    fn from(z: Complex64) -> Self {
        AfdmComplex { re: z.re, im: z.im }
    }
}

/// Delay/Doppler lattice; see the Rust `GridSpec`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfdmGridSpec {
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_step: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    pub nu_step: f64,
}

impl From<AfdmGridSpec> for GridSpec {
    fn from(g: AfdmGridSpec) -> Self {
        GridSpec {
            tau_min: g.tau_min,
            tau_max: g.tau_max,
            tau_step: g.tau_step,
            nu_min: g.nu_min,
            nu_max: g.nu_max,
            nu_step: g.nu_step,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AfdmMetrics {
    pub pslr_db: f64,
    pub islr_db: f64,
    pub peak_sidelobe_tau: f64,
    pub peak_sidelobe_nu: f64,
}

/// Opaque waveform configuration.
pub struct AfdmConfigHandle {
    inner: AfdmConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: AfdmStatus, msg: impl Into<String>) -> AfdmStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> AfdmStatus {
    let s = AfdmStatus::from(&e);
    fail(s, e.to_string())
}

/// Runs `f`, turning panics into [`AfdmStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), AfdmStatus>) -> AfdmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AfdmStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(AfdmStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn status(self) -> Result<T, AfdmStatus>;
}

impl<T> OrStatus<T> for afdm_core::Result<T> {
    fn status(self) -> Result<T, AfdmStatus> {
        self.map_err(from_error)
    }
}

unsafe fn config<'a>(h: *const AfdmConfigHandle) -> Result<&'a AfdmConfig, AfdmStatus> {
    h.as_ref().map(|h| &h.inner).ok_or_else(|| fail(AfdmStatus::NullPointer, "null configuration handle"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, AfdmStatus> {
    p.as_mut().ok_or_else(|| fail(AfdmStatus::NullPointer, format!("null {what}")))
}

unsafe fn in_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], AfdmStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(AfdmStatus::NullPointer, format!("null {what}")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, need: usize, what: &str) -> Result<&'a mut [T], AfdmStatus> {
    if len < need {
        return Err(fail(AfdmStatus::BufferTooSmall, format!("{what} holds {len} values, {need} needed")));
    }
    if p.is_null() {
        return Err(fail(AfdmStatus::NullPointer, format!("null {what}")));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn symbols(p: *const AfdmComplex, len: usize) -> Result<SymbolVector, AfdmStatus> {
    let s = in_slice(p, len, "symbol buffer")?;
    Ok(SymbolVector::from_symbols(s.iter().map(|z| Complex64::new(z.re, z.im)).collect()))
}

unsafe fn grid_spec(p: *const AfdmGridSpec) -> Result<GridSpec, AfdmStatus> {
    let g: GridSpec = (*p.as_ref().ok_or_else(|| fail(AfdmStatus::NullPointer, "null grid spec"))?).into();
    g.validate().status()?;
    Ok(g)
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn afdm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn afdm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a configuration with chirp rate `c1 = c1_num / c1_den`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn afdm_config_new(
    n: usize,
    c1_num: i64,
    c1_den: i64,
    c2: f64,
    order: u32,
    out: *mut *mut AfdmConfigHandle,
) -> AfdmStatus {
    guard(|| {
        let out = out_ref(out, "output handle")?;
        if c1_den == 0 {
            return Err(fail(AfdmStatus::InvalidArgument, "c1 denominator is zero"));
        }
        make_constellation(order).status()?;
        let cfg = AfdmConfig::new(n, Rational::new(c1_num, c1_den), c2, order).status()?;
        *out = Box::into_raw(Box::new(AfdmConfigHandle { inner: cfg }));
        Ok(())
    })
}

/// Releases a handle from [`afdm_config_new`]. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn afdm_config_free(h: *mut AfdmConfigHandle) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of lattice points along τ and ν.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn afdm_grid_shape(spec: *const AfdmGridSpec, n_tau: *mut usize, n_nu: *mut usize) -> AfdmStatus {
    guard(|| {
        let g = grid_spec(spec)?;
        let (a, b) = g.shape();
        *out_ref(n_tau, "n_tau")? = a;
        *out_ref(n_nu, "n_nu")? = b;
        Ok(())
    })
}

/// Draws `len` unit-power symbols of square `order`-QAM from `seed`.
///
/// # Safety
/// `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn afdm_draw_symbols(order: u32, seed: u64, out: *mut AfdmComplex, len: usize) -> AfdmStatus {
    guard(|| {
        let c = make_constellation(order).status()?;
        let x = c.draw_symbols(len, seed);
        let out = out_slice(out, len, len, "symbol buffer")?;
        for (o, z) in out.iter_mut().zip(x.symbols) {
            *o = z.into();
        }
        Ok(())
    })
}

/// Direct evaluation of `A(τ, ν)` for the given symbols.
///
/// # Safety
/// `x` must hold `len` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn afdm_ambiguity_point(
    cfg: *const AfdmConfigHandle,
    x: *const AfdmComplex,
    len: usize,
    tau: f64,
    nu: f64,
    out: *mut AfdmComplex,
) -> AfdmStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let x = symbols(x, len)?;
        *out_ref(out, "output")? = ambiguity_point(&x, cfg, tau, nu).status()?.into();
        Ok(())
    })
}

/// `A` on every lattice point of `spec` via the fast path.
///
/// # Safety
/// `x` must hold `len` values; `out` must hold `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn afdm_ambiguity_grid(
    cfg: *const AfdmConfigHandle,
    x: *const AfdmComplex,
    len: usize,
    spec: *const AfdmGridSpec,
    out: *mut AfdmComplex,
    out_len: usize,
) -> AfdmStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let x = symbols(x, len)?;
        let g = grid_spec(spec)?;
        g.check_cap(DEFAULT_MAX_POINTS).status()?;
        let out = out_slice(out, out_len, g.num_points(), "grid buffer")?;
        let grid = ambiguity_grid_capped(&x, cfg, &g, DEFAULT_MAX_POINTS).status()?;
        for (o, z) in out.iter_mut().zip(grid.as_complex().unwrap_or(&[])) {
            *o = (*z).into();
        }
        Ok(())
    })
}

/// Analytic mean and variance of `A(τ, ν)` over random symbols.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn afdm_analytic_moments(
    cfg: *const AfdmConfigHandle,
    tau: f64,
    nu: f64,
    mean: *mut AfdmComplex,
    variance: *mut f64,
) -> AfdmStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let kurtosis = make_constellation(cfg.order).status()?.kurtosis();
        let mp = analytic_moments(cfg, tau, nu, kurtosis);
        *out_ref(mean, "mean")? = mp.mean.into();
        *out_ref(variance, "variance")? = mp.variance;
        Ok(())
    })
}

/// Mean of a Rice variable with noncentrality `s` and per-component variance `sigma2`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn afdm_rice_mean(s: f64, sigma2: f64, out: *mut f64) -> AfdmStatus {
    guard(|| {
        if !(s >= 0.0 && sigma2 >= 0.0 && s.is_finite() && sigma2.is_finite()) {
            return Err(fail(AfdmStatus::InvalidArgument, "s and sigma2 must be finite and non-negative"));
        }
        *out_ref(out, "output")? = rice_mean(&RiceParams { s, sigma2 });
        Ok(())
    })
}

/// Checks that `2·c1·N·τ` is an integer ≥ N for τ = 1..=tau_max.
/// `first_failure` receives the smallest failing delay, or 0 on success.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn afdm_sensing_check(
    cfg: *const AfdmConfigHandle,
    tau_max: i64,
    passed: *mut bool,
    first_failure: *mut i64,
) -> AfdmStatus {
    guard(|| {
        let cfg = config(cfg)?;
        if tau_max < 1 {
            return Err(fail(AfdmStatus::InvalidArgument, "tau_max must be at least 1"));
        }
        let r = check_sensing_condition(cfg, tau_max);
        *out_ref(passed, "passed")? = r.passed();
        *out_ref(first_failure, "first_failure")? = r.failures.first().map_or(0, |f| f.tau);
        Ok(())
    })
}

/// PSLR and ISLR of a magnitude grid sampled on `spec`, with the mainlobe of `cfg`.
///
/// # Safety
/// `values` must hold `len` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn afdm_grid_metrics(
    cfg: *const AfdmConfigHandle,
    spec: *const AfdmGridSpec,
    values: *const f64,
    len: usize,
    out: *mut AfdmMetrics,
) -> AfdmStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let g = grid_spec(spec)?;
        let v = in_slice(values, len, "values")?.to_vec();
        let grid = AmbiguityGrid::real(g, GridKind::AnalyticMean, v).status()?;
        let m = sensing_metrics(&grid, &mainlobe_region(cfg)).status()?;
        *out_ref(out, "output")? = AfdmMetrics {
            pslr_db: m.pslr_db,
            islr_db: m.islr_db,
            peak_sidelobe_tau: m.peak_sidelobe_tau,
            peak_sidelobe_nu: m.peak_sidelobe_nu,
        };
        Ok(())
    })
}

/// Monte-Carlo average of `|A|` and per-point sample variance of `A`.
/// `variance` may be null.
///
/// # Safety
/// `mean_magnitude` (and `variance` if non-null) must hold `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn afdm_run_trials(
    cfg: *const AfdmConfigHandle,
    spec: *const AfdmGridSpec,
    trials: usize,
    base_seed: u64,
    mean_magnitude: *mut f64,
    variance: *mut f64,
    out_len: usize,
) -> AfdmStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let g = grid_spec(spec)?;
        g.check_cap(DEFAULT_MAX_POINTS).status()?;
        let need = g.num_points();
        let mean_out = out_slice(mean_magnitude, out_len, need, "mean buffer")?;
        let r = run_trials(cfg, &g, trials, base_seed).status()?;
        mean_out.copy_from_slice(&r.mean_magnitude.magnitudes());
        if !variance.is_null() {
            out_slice(variance, out_len, need, "variance buffer")?.copy_from_slice(&r.variance.magnitudes());
        }
        Ok(())
    })
}

/// `|μ_A|`, `σ_A` and the Rice mean on every lattice point. Any output may be null.
///
/// # Safety
/// Non-null outputs must hold `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn afdm_analytic_grids(
    cfg: *const AfdmConfigHandle,
    spec: *const AfdmGridSpec,
    mean: *mut f64,
    std: *mut f64,
    rice: *mut f64,
    out_len: usize,
) -> AfdmStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let g = grid_spec(spec)?;
        g.check_cap(DEFAULT_MAX_POINTS).status()?;
        let need = g.num_points();
        if out_len < need {
            return Err(fail(AfdmStatus::BufferTooSmall, format!("buffers hold {out_len} values, {need} needed")));
        }
        let a = analytic_grids(cfg, &g).status()?;
        for (p, grid) in [(mean, &a.mean), (std, &a.std), (rice, &a.rice_mean)] {
            if !p.is_null() {
                out_slice(p, out_len, need, "output")?.copy_from_slice(&grid.magnitudes());
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    fn handle(n: usize, num: i64, den: i64, order: u32) -> *mut AfdmConfigHandle {
        let mut h = ptr::null_mut();
        assert_eq!(unsafe { afdm_config_new(n, num, den, 0.0, order, &mut h) }, AfdmStatus::Ok);
        h
    }

    fn small() -> AfdmGridSpec {
        AfdmGridSpec { tau_min: -2.0, tau_max: 2.0, tau_step: 0.5, nu_min: -3.0, nu_max: 3.0, nu_step: 0.5 }
    }

    fn last_error() -> String {
        unsafe { CStr::from_ptr(afdm_last_error_message()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn config_errors_set_message() {
        let mut h = ptr::null_mut();
        assert_eq!(unsafe { afdm_config_new(64, 1, 1, 0.0, 8, &mut h) }, AfdmStatus::InvalidOrder);
        assert!(last_error().contains("order 8"));
        assert!(h.is_null());
        assert_eq!(unsafe { afdm_config_new(64, 1, 0, 0.0, 4, &mut h) }, AfdmStatus::InvalidArgument);
        assert_eq!(unsafe { afdm_config_new(1, 1, 1, 0.0, 4, &mut h) }, AfdmStatus::InvalidConfig);
        assert_eq!(unsafe { afdm_config_new(64, 1, 1, 0.0, 4, ptr::null_mut()) }, AfdmStatus::NullPointer);
        unsafe { afdm_config_free(ptr::null_mut()) };
    }

    #[test]
    fn origin_point_and_grid() {
        let h = handle(32, 1, 1, 4);
        let mut x = vec![AfdmComplex::default(); 32];
        assert_eq!(unsafe { afdm_draw_symbols(4, 5, x.as_mut_ptr(), x.len()) }, AfdmStatus::Ok);
        let mut a = AfdmComplex::default();
        assert_eq!(unsafe { afdm_ambiguity_point(h, x.as_ptr(), 32, 0.0, 0.0, &mut a) }, AfdmStatus::Ok);
        assert!((a.re - 1.0).abs() < 1e-12 && a.im.abs() < 1e-12);

        let spec = small();
        let (mut nt, mut nn) = (0, 0);
        assert_eq!(unsafe { afdm_grid_shape(&spec, &mut nt, &mut nn) }, AfdmStatus::Ok);
        assert_eq!((nt, nn), (9, 13));
        let mut g = vec![AfdmComplex::default(); nt * nn];
        assert_eq!(
            unsafe { afdm_ambiguity_grid(h, x.as_ptr(), 32, &spec, g.as_mut_ptr(), 10) },
            AfdmStatus::BufferTooSmall
        );
        assert_eq!(unsafe { afdm_ambiguity_grid(h, x.as_ptr(), 32, &spec, g.as_mut_ptr(), g.len()) }, AfdmStatus::Ok);
        let o = 4 * nn + 6;
        assert!((g[o].re - 1.0).abs() < 1e-12);
        let mut p = AfdmComplex::default();
        unsafe { afdm_ambiguity_point(h, x.as_ptr(), 32, 0.5, -1.5, &mut p) };
        let idx = 5 * nn + 3;
        assert!((g[idx].re - p.re).abs() < 1e-12 && (g[idx].im - p.im).abs() < 1e-12);
        assert_eq!(
            unsafe { afdm_ambiguity_point(h, x.as_ptr(), 31, 0.0, 0.0, &mut a) },
            AfdmStatus::DimensionMismatch
        );
        unsafe { afdm_config_free(h) };
    }

    #[test]
    fn moments_rice_and_sensing() {
        let h = handle(64, 1, 1, 16);
        let (mut mean, mut var) = (AfdmComplex::default(), 0.0);
        assert_eq!(unsafe { afdm_analytic_moments(h, 0.0, 0.0, &mut mean, &mut var) }, AfdmStatus::Ok);
        assert!((mean.re - 1.0).abs() < 1e-12);
        assert!((var - 0.32 / 64.0).abs() < 1e-12);
        let mut r = 0.0;
        assert_eq!(unsafe { afdm_rice_mean(0.0, 0.5, &mut r) }, AfdmStatus::Ok);
        assert!((r - (std::f64::consts::PI / 4.0).sqrt()).abs() < 1e-12);
        assert_eq!(unsafe { afdm_rice_mean(-1.0, 0.5, &mut r) }, AfdmStatus::InvalidArgument);

        let (mut ok, mut first) = (false, -1);
        assert_eq!(unsafe { afdm_sensing_check(h, 16, &mut ok, &mut first) }, AfdmStatus::Ok);
        assert!(ok && first == 0);
        let low = handle(128, 1, 128, 4);
        unsafe { afdm_sensing_check(low, 16, &mut ok, &mut first) };
        assert!(!ok && first == 1);
        unsafe {
            afdm_config_free(h);
            afdm_config_free(low);
        }
    }

    #[test]
    fn trials_and_analytic_grids_feed_metrics() {
        let h = handle(16, 1, 1, 4);
        let spec = small();
        let n = 9 * 13;
        let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
        assert_eq!(unsafe { afdm_run_trials(h, &spec, 10, 3, m.as_mut_ptr(), v.as_mut_ptr(), n) }, AfdmStatus::Ok);
        let o = 4 * 13 + 6;
        assert!((m[o] - 1.0).abs() < 1e-12 && v[o] < 1e-20);
        let (mut mu, mut rice) = (vec![0.0; n], vec![0.0; n]);
        assert_eq!(
            unsafe { afdm_analytic_grids(h, &spec, mu.as_mut_ptr(), ptr::null_mut(), rice.as_mut_ptr(), n) },
            AfdmStatus::Ok
        );
        let mut out = AfdmMetrics::default();
        assert_eq!(unsafe { afdm_grid_metrics(h, &spec, rice.as_ptr(), n, &mut out) }, AfdmStatus::Ok);
        assert!(out.pslr_db < 0.0);
        assert_eq!(unsafe { afdm_grid_metrics(h, &spec, rice.as_ptr(), n - 1, &mut out) }, AfdmStatus::DimensionMismatch);
        let bad = AfdmGridSpec { tau_step: 0.0, ..spec };
        assert_eq!(unsafe { afdm_run_trials(h, &bad, 10, 3, m.as_mut_ptr(), ptr::null_mut(), n) }, AfdmStatus::InvalidGrid);
        unsafe { afdm_config_free(h) };
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(afdm_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
