//! C ABI over `asq_core`.
//!
//! Every fallible function returns an [`AsqStatus`]; on failure a
//! human-readable message is available from [`asq_last_error`] on the same
//! thread. Objects with internal state are opaque handles that must be
//! released with their `_free` function.

#![deny(improper_ctypes_definitions)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use asq_core::coupling::{self, CouplingMethod, SignConvention};
use asq_core::fitting::{self, FitResult, PeakKind, Trace};
use asq_core::lindblad::{self, DecayRates, DriveConfig};
use asq_core::model::{self, DeviceParams, FluxPoint, SpinConfig};
use asq_core::transmon::{self, ChargeBasisConfig};
use asq_core::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    OutOfRange = 4,
    Singular = 5,
    Convergence = 6,
    NotUnique = 7,
    DegenerateFit = 8,
    ExtractionFailed = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsqMethod {
    Analytic = 0,
    Numeric = 1,
    CurrentProduct = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsqConvention {
    /// `E_dd + E_uu - E_du - E_ud = hJ`.
    Eigenenergy = 0,
    /// `H = -(hJ/2) sz sz`.
    Interaction = 1,
}

/// Device energies in GHz; skewness is dimensionless.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsqDeviceParams {
    pub ej_i_1: f64,
    pub ej_i_2: f64,
    pub ej_s_1: f64,
    pub ej_s_2: f64,
    pub ej_c: f64,
    pub e_c: f64,
    pub skew_1: f64,
    pub skew_2: f64,
}

/// Drive amplitudes, detunings and coupling in MHz.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsqDrive {
    pub omega_p1: f64,
    pub omega_p2: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub j: f64,
}

/// Lifetimes in microseconds; `INFINITY` disables a channel.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsqRates {
    pub t1_1: f64,
    pub t1_2: f64,
    pub t2_1: f64,
    pub t2_2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AsqPeakDecision {
    pub is_double: bool,
    pub j_mhz: f64,
    pub j_sigma: f64,
    pub chi_ratio: f64,
    pub f_a: f64,
    pub sigma: f64,
    pub f_b: f64,
}

/// Opaque device handle.
pub struct AsqDevice {
    params: DeviceParams,
}

/// Opaque fit-result handle.
pub struct AsqFit {
    result: FitResult,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AsqStatus {
    match e {
        Error::Domain(_) => AsqStatus::Domain,
        Error::OutOfRange { .. } | Error::Range { .. } => AsqStatus::OutOfRange,
        Error::Singularity(_) => AsqStatus::Singular,
        Error::Convergence { .. } => AsqStatus::Convergence,
        Error::Degenerate(_) => AsqStatus::NotUnique,
        Error::DegenerateFit(_) => AsqStatus::DegenerateFit,
        Error::Extraction { .. } => AsqStatus::ExtractionFailed,
        Error::Invalid(_) => AsqStatus::InvalidArgument,
    }
}

struct Failure(AsqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AsqStatus::NullPointer, format!("{what} is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AsqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AsqStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AsqStatus::Panic
        }
    }
}

/// # Safety
/// `p` is NULL or points to `n` readable doubles.
unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// # Safety
/// `p` is NULL or valid for writes.
unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// # Safety
/// `p` is NULL or a live handle.
unsafe fn device<'a>(p: *const AsqDevice) -> Result<&'a DeviceParams, Failure> {
    p.as_ref().map(|d| &d.params).ok_or_else(|| null("device"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn asq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn asq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a device handle from validated parameters.
///
/// # Safety
/// `params` must point to a readable [`AsqDeviceParams`]; `out` must be
/// writable. The handle is released with [`asq_device_free`].
#[no_mangle]
pub unsafe extern "C" fn asq_device_new(params: *const AsqDeviceParams, out: *mut *mut AsqDevice) -> AsqStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let params = DeviceParams {
            ej_i_1: p.ej_i_1,
            ej_i_2: p.ej_i_2,
            ej_s_1: p.ej_s_1,
            ej_s_2: p.ej_s_2,
            ej_c: p.ej_c,
            e_c: p.e_c,
            skew_1: p.skew_1,
            skew_2: p.skew_2,
        };
        params.validate()?;
        write(out, Box::into_raw(Box::new(AsqDevice { params })), "out")
    })
}

/// # Safety
/// `dev` is NULL or a handle from [`asq_device_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn asq_device_free(dev: *mut AsqDevice) {
    if !dev.is_null() {
        drop(Box::from_raw(dev));
    }
}

/// Coupling strength in MHz at the given loop fluxes (flux quanta).
/// `out_convention` may be NULL; otherwise it receives the sign
/// convention of the returned value.
///
/// # Safety
/// `dev` is a live handle; `out_j` is writable; `out_convention` is NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn asq_coupling(
    dev: *const AsqDevice,
    method: AsqMethod,
    flux_1: f64,
    flux_2: f64,
    out_j: *mut f64,
    out_convention: *mut AsqConvention,
) -> AsqStatus {
    guard(|| {
        let p = device(dev)?;
        let m = match method {
            AsqMethod::Analytic => CouplingMethod::Analytic,
            AsqMethod::Numeric => CouplingMethod::Numeric,
            AsqMethod::CurrentProduct => CouplingMethod::CurrentProduct,
        };
        let r = coupling::evaluate(m, p, FluxPoint::new(flux_1, flux_2))?;
        write(out_j, r.j, "out_j")?;
        if !out_convention.is_null() {
            out_convention.write(match r.convention {
                SignConvention::Eigenenergy => AsqConvention::Eigenenergy,
                SignConvention::Interaction => AsqConvention::Interaction,
            });
        }
        Ok(())
    })
}

/// Spin-independent inductance in nH; `INFINITY` where it diverges.
///
/// # Safety
/// `dev` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn asq_l_asq(dev: *const AsqDevice, flux_1: f64, flux_2: f64, out: *mut f64) -> AsqStatus {
    guard(|| {
        let p = device(dev)?;
        write(out, model::l_asq(p, FluxPoint::new(flux_1, flux_2)).as_f64(), "out")
    })
}

/// Transmon 0-1 frequencies (GHz) of the four spin branches in the order
/// dd, du, ud, uu.
///
/// # Safety
/// `dev` is a live handle; `out` points to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn asq_transmon_f01(
    dev: *const AsqDevice,
    flux_1: f64,
    flux_2: f64,
    n_max: usize,
    out: *mut f64,
) -> AsqStatus {
    guard(|| {
        let p = device(dev)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ChargeBasisConfig { n_max, ..ChargeBasisConfig::default() };
        let s = transmon::transmon_spectrum(p, FluxPoint::new(flux_1, flux_2), cfg)?;
        for (i, c) in SpinConfig::ALL.iter().enumerate() {
            out.add(i).write(s.f01(*c));
        }
        Ok(())
    })
}

/// Coupling-junction energy (GHz) giving the transmon frequency `ft` (GHz)
/// with the device's ASQ energies; the device's own `ej_c` is ignored.
///
/// # Safety
/// `dev` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn asq_ejc_from_ft(dev: *const AsqDevice, ft: f64, n_max: usize, out: *mut f64) -> AsqStatus {
    guard(|| {
        let p = device(dev)?;
        let cfg = ChargeBasisConfig { n_max, ..ChargeBasisConfig::default() };
        write(out, transmon::ejc_from_ft(ft, p, cfg)?, "out")
    })
}

/// Steady-state populations in the order dd, du, ud, uu.
///
/// # Safety
/// `drive` and `rates` are readable; `out` points to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn asq_steady_state(drive: *const AsqDrive, rates: *const AsqRates, out: *mut f64) -> AsqStatus {
    guard(|| {
        let d = drive.as_ref().ok_or_else(|| null("drive"))?;
        let r = rates.as_ref().ok_or_else(|| null("rates"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = DriveConfig { omega_p1: d.omega_p1, omega_p2: d.omega_p2, delta_1: d.delta_1, delta_2: d.delta_2, j: d.j };
        cfg.validate()?;
        let rates = DecayRates { t1_1: r.t1_1, t1_2: r.t1_2, t2_1: r.t2_1, t2_2: r.t2_2 };
        let sol = lindblad::steady_state(&lindblad::rotating_hamiltonian(&cfg), &rates)?;
        for (i, p) in sol.populations.iter().enumerate() {
            out.add(i).write(*p);
        }
        Ok(())
    })
}

fn fit_handle(result: FitResult) -> *mut AsqFit {
    let names = result
        .names
        .iter()
        .map(|n| CString::new(n.as_str()).expect("parameter names have no NULs"))
        .collect();
    Box::into_raw(Box::new(AsqFit { result, names }))
}

/// Complex resonator fit; parameters `f_r0` (GHz), `Q_c`, `Q_i`, `alpha`.
///
/// # Safety
/// `f`, `re`, `im` point to `n` readable doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn asq_fit_resonator(
    f: *const f64,
    re: *const f64,
    im: *const f64,
    n: usize,
    out: *mut *mut AsqFit,
) -> AsqStatus {
    guard(|| {
        let (f, re, im) = (slice(f, n, "f")?, slice(re, n, "re")?, slice(im, n, "im")?);
        let s21: Vec<Complex64> = re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let r = fitting::fit_resonator(f, &s21)?;
        write(out, fit_handle(r), "out")
    })
}

/// Sinusoidal (or skewed) flux-dispersion fit.
///
/// # Safety
/// `control` and `freq` point to `n` readable doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn asq_fit_cpr(
    control: *const f64,
    freq: *const f64,
    n: usize,
    skewed: bool,
    out: *mut *mut AsqFit,
) -> AsqStatus {
    guard(|| {
        let r = fitting::fit_cpr(slice(control, n, "control")?, slice(freq, n, "freq")?, skewed)?;
        write(out, fit_handle(r), "out")
    })
}

/// Exponential relaxation fit; parameters `a`, `T1`, `c`.
///
/// # Safety
/// `t` and `y` point to `n` readable doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn asq_fit_t1(t: *const f64, y: *const f64, n: usize, out: *mut *mut AsqFit) -> AsqStatus {
    guard(|| {
        let r = fitting::fit_t1(slice(t, n, "t")?, slice(y, n, "y")?)?;
        write(out, fit_handle(r), "out")
    })
}

/// # Safety
/// `fit` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn asq_fit_param_count(fit: *const AsqFit) -> usize {
    fit.as_ref().map_or(0, |f| f.result.params.len())
}

/// Name, value and one-sigma error of parameter `index`. Any output pointer
/// may be NULL. The name stays valid until the handle is freed.
///
/// # Safety
/// `fit` is a live handle; non-NULL outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn asq_fit_param(
    fit: *const AsqFit,
    index: usize,
    name: *mut *const c_char,
    value: *mut f64,
    sigma: *mut f64,
) -> AsqStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        if index >= f.result.params.len() {
            return Err(Failure(
                AsqStatus::InvalidArgument,
                format!("parameter index {index} out of range (fit has {})", f.result.params.len()),
            ));
        }
        if !name.is_null() {
            name.write(f.names[index].as_ptr());
        }
        if !value.is_null() {
            value.write(f.result.params[index]);
        }
        if !sigma.is_null() {
            sigma.write(f.result.sigmas[index]);
        }
        Ok(())
    })
}

/// Looks a parameter up by name.
///
/// # Safety
/// `fit` is a live handle; `name` is a NUL-terminated string; `value` is writable.
#[no_mangle]
pub unsafe extern "C" fn asq_fit_get(fit: *const AsqFit, name: *const c_char, value: *mut f64) -> AsqStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        if name.is_null() {
            return Err(null("name"));
        }
        let key = CStr::from_ptr(name).to_string_lossy();
        let v = f
            .result
            .get(&key)
            .ok_or_else(|| Failure(AsqStatus::InvalidArgument, format!("no fit parameter named {key}")))?;
        write(value, v, "value")
    })
}

/// Residual sum of squares and convergence flag; either output may be NULL.
///
/// # Safety
/// `fit` is a live handle; non-NULL outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn asq_fit_summary(fit: *const AsqFit, rss: *mut f64, converged: *mut bool) -> AsqStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        if !rss.is_null() {
            rss.write(f.result.rss);
        }
        if !converged.is_null() {
            converged.write(f.result.converged);
        }
        Ok(())
    })
}

/// # Safety
/// `fit` is NULL or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn asq_fit_free(fit: *mut AsqFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Single/double peak decision on an undriven and a driven trace sharing
/// the frequency axis `x` (GHz).
///
/// # Safety
/// `x`, `undriven`, `driven` point to `n` readable doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn asq_extract_j(
    x: *const f64,
    undriven: *const f64,
    driven: *const f64,
    n: usize,
    out: *mut AsqPeakDecision,
) -> AsqStatus {
    guard(|| {
        let x = slice(x, n, "x")?;
        let d = fitting::extract_j(
            &Trace::new(x, slice(undriven, n, "undriven")?),
            &Trace::new(x, slice(driven, n, "driven")?),
        )?;
        write(
            out,
            AsqPeakDecision {
                is_double: d.kind == PeakKind::Double,
                j_mhz: d.j_mhz,
                j_sigma: d.j_sigma,
                chi_ratio: d.chi_ratio,
                f_a: d.f_a,
                sigma: d.sigma,
                f_b: d.f_b,
            },
            "out",
        )
    })
}
