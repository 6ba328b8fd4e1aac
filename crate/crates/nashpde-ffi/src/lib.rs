//! C ABI over the simulation core.
//!
//! Scenarios and results are opaque heap handles. Every fallible call
//! returns an [`NpStatus`]; on failure the message is kept per thread and
//! read back with [`np_last_error`]. Strings returned to C are released
//! with [`np_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nashpde::harness::{self, export, ScenarioConfig, ScenarioResult};
use nashpde::Error;

/// Status codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Config = 4,
    Singular = 5,
    Unsupported = 6,
    Simulation = 7,
    Io = 8,
    OutOfRange = 9,
    Panic = 10,
}

/// Sampled signals of a result, one column per player.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpSignal {
    /// Applied boundary input.
    Input = 0,
    /// Propagated action at the map.
    Action = 1,
    Payoff = 2,
    Gradient = 3,
    Hessian = 4,
    Control = 5,
}

/// Opaque scenario configuration.
pub struct NpScenario(ScenarioConfig);

/// Opaque run result.
pub struct NpResult(ScenarioResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(e: &Error) -> NpStatus {
    match e {
        Error::Input(_) | Error::Config(_) | Error::InsufficientSpan { .. } => NpStatus::Config,
        Error::Singular(_) => NpStatus::Singular,
        Error::Unsupported(_) => NpStatus::Unsupported,
        Error::Simulation { .. } => NpStatus::Simulation,
        Error::Io { .. } => NpStatus::Io,
        Error::Parse(_) => NpStatus::Parse,
    }
}

fn fail(e: Error) -> NpStatus {
    set_error(e.to_string());
    status_of(&e)
}

/// Run `f`, turning panics into `NpStatus::Panic`.
fn guard(f: impl FnOnce() -> NpStatus) -> NpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == NpStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => {
            set_error("internal panic");
            NpStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, NpStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(NpStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        NpStatus::InvalidUtf8
    })
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

macro_rules! try_np {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! non_null {
    ($p:expr) => {
        if $p.is_null() {
            set_error(concat!("null pointer: ", stringify!($p)));
            return NpStatus::NullPointer;
        }
    };
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn np_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library and not be freed already.
#[no_mangle]
pub unsafe extern "C" fn np_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of built-in scenarios.
#[no_mangle]
pub extern "C" fn np_builtin_count() -> usize {
    harness::builtin_scenarios().len()
}

/// Name of built-in `index`, or null if out of range. Free with
/// [`np_string_free`].
#[no_mangle]
pub extern "C" fn np_builtin_name(index: usize) -> *mut c_char {
    harness::builtin_scenarios().get(index).map_or(ptr::null_mut(), |c| to_c(c.name.clone()))
}

/// # Safety
/// `name` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn np_scenario_builtin(name: *const c_char, out: *mut *mut NpScenario) -> NpStatus {
    guard(|| {
        non_null!(out);
        let name = try_np!(read_str(name));
        match harness::builtin(name) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(NpScenario(c)));
                NpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parse a JSON scenario.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn np_scenario_from_json(json: *const c_char, out: *mut *mut NpScenario) -> NpStatus {
    guard(|| {
        non_null!(out);
        let text = try_np!(read_str(json));
        match ScenarioConfig::from_json(text).and_then(|c| c.validate().map(|_| c)) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(NpScenario(c)));
                NpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Resolved config as pretty JSON, or null on a null handle.
///
/// # Safety
/// `s` is a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn np_scenario_to_json(s: *const NpScenario) -> *mut c_char {
    match s.as_ref() {
        Some(s) => to_c(s.0.to_json()),
        None => ptr::null_mut(),
    }
}

/// Set a sweepable parameter (`epsilon`, `t_end` or `dt`).
///
/// # Safety
/// `s` is a live scenario handle; `param` is a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn np_scenario_set(s: *mut NpScenario, param: *const c_char, value: f64) -> NpStatus {
    guard(|| {
        non_null!(s);
        let param = try_np!(read_str(param));
        let s = &mut *s;
        match harness::with_param(&s.0, param, value) {
            Ok(mut c) => {
                c.name = s.0.name.clone();
                s.0 = c;
                NpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Switch the compensating laws on or off.
///
/// # Safety
/// `s` is a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn np_scenario_set_compensation(s: *mut NpScenario, on: bool) -> NpStatus {
    guard(|| {
        non_null!(s);
        (*s).0.compensation = on;
        NpStatus::Ok
    })
}

/// # Safety
/// `s` is null or a live scenario handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn np_scenario_free(s: *mut NpScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Simulate. A diverged run is still `Ok`; query [`np_result_divergence`].
///
/// # Safety
/// `s` is a live scenario handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn np_run(s: *const NpScenario, out: *mut *mut NpResult) -> NpStatus {
    guard(|| {
        non_null!(s);
        non_null!(out);
        match harness::run_scenario(&(*s).0) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(NpResult(r)));
                NpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `r` is null or a live result handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn np_result_free(r: *mut NpResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` is a live result handle.
#[no_mangle]
pub unsafe extern "C" fn np_result_players(r: *const NpResult) -> usize {
    r.as_ref().map_or(0, |r| r.0.players.len())
}

/// # Safety
/// `r` is a live result handle.
#[no_mangle]
pub unsafe extern "C" fn np_result_samples(r: *const NpResult) -> usize {
    r.as_ref().map_or(0, |r| r.0.times.len())
}

fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> NpStatus {
    if len < src.len() {
        set_error(format!("buffer holds {len} values, need {}", src.len()));
        return NpStatus::OutOfRange;
    }
    // SAFETY: caller guarantees `buf` has room for `len >= src.len()` values.
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    NpStatus::Ok
}

/// Copy the sample times into `buf` (at least `np_result_samples` values).
///
/// # Safety
/// `r` is a live result handle; `buf` has room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn np_result_times(r: *const NpResult, buf: *mut f64, len: usize) -> NpStatus {
    guard(|| {
        non_null!(r);
        non_null!(buf);
        copy_out(&(*r).0.times, buf, len)
    })
}

/// Copy one sampled signal of `player` into `buf`.
///
/// # Safety
/// `r` is a live result handle; `buf` has room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn np_result_signal(r: *const NpResult, player: usize, signal: NpSignal, buf: *mut f64, len: usize) -> NpStatus {
    guard(|| {
        non_null!(r);
        non_null!(buf);
        let r = &(*r).0;
        let Some(p) = r.players.get(player) else {
            set_error(format!("player {player} out of range"));
            return NpStatus::OutOfRange;
        };
        let src = match signal {
            NpSignal::Input => &p.theta,
            NpSignal::Action => &p.big_theta,
            NpSignal::Payoff => &p.y,
            NpSignal::Gradient => &p.g,
            NpSignal::Hessian => &p.h_hat,
            NpSignal::Control => &p.u,
        };
        copy_out(src, buf, len)
    })
}

/// Target action and tail residual `sup |Theta - Theta*|` of `player`.
///
/// # Safety
/// `r` is a live result handle; `star` and `tail` are writable.
#[no_mangle]
pub unsafe extern "C" fn np_result_tail(r: *const NpResult, player: usize, star: *mut f64, tail: *mut f64) -> NpStatus {
    guard(|| {
        non_null!(r);
        non_null!(star);
        non_null!(tail);
        let r = &(*r).0;
        if player >= r.players.len() {
            set_error(format!("player {player} out of range"));
            return NpStatus::OutOfRange;
        }
        *star = r.theta_star[player];
        *tail = r.tail_output[player];
        NpStatus::Ok
    })
}

/// True if the divergence detector fired; the time goes to `t` when given.
///
/// # Safety
/// `r` is a live result handle; `t` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn np_result_divergence(r: *const NpResult, t: *mut f64) -> bool {
    match r.as_ref().and_then(|r| r.0.divergence) {
        Some(at) => {
            if !t.is_null() {
                *t = at;
            }
            true
        }
        None => false,
    }
}

/// Write the CSV, manifest and report of a run into `dir`.
///
/// # Safety
/// Both handles are live; `dir` is a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn np_result_export(s: *const NpScenario, r: *const NpResult, dir: *const c_char) -> NpStatus {
    guard(|| {
        non_null!(s);
        non_null!(r);
        let dir = try_np!(read_str(dir));
        match export::export(&(*s).0, &(*r).0, Path::new(dir), false) {
            Ok(_) => NpStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Nash equilibrium of the heterogeneous duopoly at coupling `eps`.
///
/// # Safety
/// `out` has room for two doubles.
#[no_mangle]
pub unsafe extern "C" fn np_duopoly_nash(eps: f64, out: *mut f64) -> NpStatus {
    guard(|| {
        non_null!(out);
        match nashpde::game::duopoly(eps).and_then(|g| g.nash_equilibrium()) {
            Ok(th) => {
                ptr::copy_nonoverlapping(th.as_ptr(), out, 2);
                NpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
