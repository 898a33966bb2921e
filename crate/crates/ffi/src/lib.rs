//! C interface to the `bcrb` link simulator.
//!
//! A scenario is held behind the opaque `BcrbScenario` handle. Every fallible
//! function returns a `BcrbStatus` (0 on success, negative on failure) and
//! writes its results through caller-provided out pointers, which are left
//! untouched on failure. The message of the most recent failure on the
//! calling thread is available from [`bcrb_last_error_message`].
//!
//! # Safety
//!
//! Pointers passed in must be null or valid for the access the function
//! documents. Handles must come from this library and be released exactly
//! once with [`bcrb_scenario_free`]; strings returned by the library must be
//! released with [`bcrb_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bcrb::comms;
use bcrb::gaussian_beam::spot_radii;
use bcrb::link_budget::power_budget;
use bcrb::ray_matrix::{is_stable, round_trip};
use bcrb::scenario::parse_scenario;
use bcrb::search::{calibrate_n, max_stable_distance};
use bcrb::{generate_figure, load_scenario, Error, FigureId, FigureOptions, Scenario, System};

/// Result codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcrbStatus {
    Ok = 0,
    NullPointer = -1,
    InvalidArgument = -2,
    Validation = -3,
    Parse = -4,
    Unstable = -5,
    Infeasible = -6,
    Io = -7,
    Panic = -99,
}

/// Cavity selector accepted wherever a `system` argument appears.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcrbSystem {
    Bcrb = 0,
    Original = 1,
}

/// Opaque scenario handle.
pub struct BcrbScenario {
    inner: Scenario,
}

/// Power chain at one operating point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BcrbPowerBudget {
    /// Effective limiting aperture (m).
    pub aperture: f64,
    /// Transmission loss.
    pub delta_t: f64,
    /// External beam power (W).
    pub p_beam: f64,
    /// PV electrical output (W).
    pub p_out: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> BcrbStatus {
    match e {
        Error::UnstableCavity { .. } | Error::UnstableInRange { .. } => BcrbStatus::Unstable,
        Error::NoStableRegion { .. } | Error::Infeasible(_) | Error::AnchorInfeasible { .. } => BcrbStatus::Infeasible,
        Error::Parse(_) | Error::Unit { .. } | Error::UnknownKeys(_) => BcrbStatus::Parse,
        Error::Validation { .. } | Error::InvalidGeometry { .. } | Error::InvalidElement(_) => BcrbStatus::Validation,
        Error::Io(_) => BcrbStatus::Io,
        _ => BcrbStatus::InvalidArgument,
    }
}

/// Runs `body`, recording any error or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), (BcrbStatus, String)>) -> BcrbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BcrbStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            BcrbStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (BcrbStatus, String)>;
}

impl<T> IntoFfi<T> for bcrb::Result<T> {
    fn ffi(self) -> Result<T, (BcrbStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (BcrbStatus, String) {
    (BcrbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn scenario_ref<'a>(s: *const BcrbScenario) -> Result<&'a Scenario, (BcrbStatus, String)> {
    unsafe { s.as_ref() }.map(|s| &s.inner).ok_or_else(|| null("scenario"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (BcrbStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| (BcrbStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn system_arg(system: i32) -> Result<System, (BcrbStatus, String)> {
    match system {
        0 => Ok(System::Bcrb),
        1 => Ok(System::Original),
        other => Err((BcrbStatus::InvalidArgument, format!("unknown system selector {other}"))),
    }
}

fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (BcrbStatus, String)> {
    unsafe { p.as_mut() }.ok_or_else(|| null(what))
}

fn boxed(s: Scenario) -> *mut BcrbScenario {
    Box::into_raw(Box::new(BcrbScenario { inner: s }))
}

/// Message of the last failure on this thread, or null if none occurred.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bcrb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Reference scenario with the calibrated loss scale.
#[no_mangle]
pub extern "C" fn bcrb_scenario_new_default() -> *mut BcrbScenario {
    boxed(Scenario::default())
}

/// Parses a scenario from a NUL-terminated JSON document.
///
/// # Safety
/// `json` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcrb_scenario_from_json(json: *const c_char, strict: bool, out: *mut *mut BcrbScenario) -> BcrbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = unsafe { str_arg(json, "json") }?;
        *out = boxed(parse_scenario(text, strict).ffi()?);
        Ok(())
    })
}

/// Loads a scenario file.
///
/// # Safety
/// `path` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcrb_scenario_load(path: *const c_char, strict: bool, out: *mut *mut BcrbScenario) -> BcrbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = unsafe { str_arg(path, "path") }?;
        *out = boxed(load_scenario(path, strict).ffi()?);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `scenario` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bcrb_scenario_free(scenario: *mut BcrbScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Serializes the scenario to JSON; release the result with [`bcrb_string_free`].
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcrb_scenario_to_json(scenario: *const BcrbScenario, out: *mut *mut c_char) -> BcrbStatus {
    guard(|| {
        let s = unsafe { scenario_ref(scenario) }?;
        let out = out_arg(out, "out")?;
        *out = into_c_string(s.to_json_string())?;
        Ok(())
    })
}

/// Round-trip ABCD matrix at distance `d`, written row-major to `out[4]`.
///
/// # Safety
/// `scenario` must be a live handle; `out` must hold four doubles.
#[no_mangle]
pub unsafe extern "C" fn bcrb_round_trip(scenario: *const BcrbScenario, system: i32, d: f64, out: *mut f64) -> BcrbStatus {
    guard(|| {
        let s = unsafe { scenario_ref(scenario) }?;
        let system = system_arg(system)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = round_trip(&s.geometry.with_distance(d), system).ffi()?;
        unsafe { ptr::copy_nonoverlapping(m.to_array().as_ptr(), out, 4) };
        Ok(())
    })
}

/// Stability flag `0 < A·D < 1` at distance `d`.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcrb_is_stable(scenario: *const BcrbScenario, system: i32, d: f64, out: *mut bool) -> BcrbStatus {
    guard(|| {
        let s = unsafe { scenario_ref(scenario) }?;
        let system = system_arg(system)?;
        let out = out_arg(out, "out")?;
        *out = is_stable(&round_trip(&s.geometry.with_distance(d), system).ffi()?);
        Ok(())
    })
}

/// Spot radii ω₁, ω₂, ω₃ (m) written to `out[3]`.
///
/// # Safety
/// `scenario` must be a live handle; `out` must hold three doubles.
#[no_mangle]
pub unsafe extern "C" fn bcrb_spot_radii(scenario: *const BcrbScenario, system: i32, d: f64, out: *mut f64) -> BcrbStatus {
    guard(|| {
        let s = unsafe { scenario_ref(scenario) }?;
        let system = system_arg(system)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = spot_radii(&s.geometry.with_distance(d), system).ffi()?;
        unsafe { ptr::copy_nonoverlapping([r.omega1, r.omega2, r.omega3].as_ptr(), out, 3) };
        Ok(())
    })
}

/// Loss, beam power and PV output with the scenario's loss scale and
/// clamping choice.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcrb_power_budget(
    scenario: *const BcrbScenario,
    system: i32,
    d: f64,
    p_in: f64,
    mu: f64,
    out: *mut BcrbPowerBudget,
) -> BcrbStatus {
    guard(|| {
        let s = unsafe { scenario_ref(scenario) }?;
        let system = system_arg(system)?;
        let out = out_arg(out, "out")?;
        let link = s.resolved_link().ffi()?;
        let g = s.geometry.with_distance(d);
        let pb = power_budget(&g, &link, system, d, p_in, mu, s.model_choices.clamp_negative_power).ffi()?;
        *out = BcrbPowerBudget { aperture: pb.aperture, delta_t: pb.delta_t, p_beam: pb.p_beam, p_out: pb.p_out };
        Ok(())
    })
}

/// Spectral efficiency of the data branch for beam power `p_beam` and split
/// ratio `mu`, in the scenario's log base.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcrb_spectral_efficiency(scenario: *const BcrbScenario, p_beam: f64, mu: f64, out: *mut f64) -> BcrbStatus {
    guard(|| {
        let s = unsafe { scenario_ref(scenario) }?;
        let out = out_arg(out, "out")?;
        let receiver = comms::ReceiverParams { mu, ..s.receiver };
        receiver
            .validate()
            .map_err(|(field, reason)| (BcrbStatus::Validation, format!("receiver.{field}: {reason}")))?;
        *out = comms::evaluate(p_beam, &receiver, s.model_choices.log_base).ffi()?.spectral_efficiency;
        Ok(())
    })
}

/// Upper edge (m) of the first stable distance band of the telescope cavity,
/// searched up to `d_hi`.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcrb_max_stable_distance(scenario: *const BcrbScenario, d_hi: f64, out: *mut f64) -> BcrbStatus {
    guard(|| {
        let s = unsafe { scenario_ref(scenario) }?;
        let out = out_arg(out, "out")?;
        *out = max_stable_distance(&s.geometry, d_hi).ffi()?.d_max;
        Ok(())
    })
}

/// Loss scale N fitted to the scenario's calibration anchor.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bcrb_calibrate_n(scenario: *const BcrbScenario, out: *mut f64) -> BcrbStatus {
    guard(|| {
        let s = unsafe { scenario_ref(scenario) }?;
        let out = out_arg(out, "out")?;
        *out = calibrate_n(&s.calibration, s.geometry.b_gain, s.geometry.lambda, &s.link).ffi()?;
        Ok(())
    })
}

/// CSV dataset of a figure (`"fig6"` .. `"fig13"`) with default grids.
/// Release the result with [`bcrb_string_free`].
///
/// # Safety
/// `scenario` must be a live handle; `id` a valid C string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bcrb_figure_csv(scenario: *const BcrbScenario, id: *const c_char, out: *mut *mut c_char) -> BcrbStatus {
    guard(|| {
        let s = unsafe { scenario_ref(scenario) }?;
        let id: FigureId = unsafe { str_arg(id, "id") }?.parse().ffi()?;
        let out = out_arg(out, "out")?;
        let ds = generate_figure(id, s, &FigureOptions::default()).ffi()?;
        *out = into_c_string(ds.to_csv())?;
        Ok(())
    })
}

fn into_c_string(s: String) -> Result<*mut c_char, (BcrbStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (BcrbStatus::InvalidArgument, "output contains a NUL byte".into()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bcrb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
