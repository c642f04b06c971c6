//! C ABI over `nvmem`.
//!
//! Objects are opaque handles created by `nvm_*_new`/`nvm_run_*` and
//! released with the matching `nvm_*_free`. Every fallible call returns an
//! [`NvmStatus`]; on failure [`nvm_last_error`] describes the problem for
//! the calling thread. Panics are caught and reported as
//! `NVM_STATUS_PANIC`.
//!
//! # Safety
//!
//! Handles must come from this library and not be used after they are
//! freed. Array arguments must point to at least the stated number of
//! values, strings must be NUL-terminated, and `out` pointers must be
//! writable. A handle may be used from one thread at a time.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nvmem::cli::RunConfig;
use nvmem::dissipation::{analytic_populations, RateParams};
use nvmem::experiments::{self, LossBudget, Setup, StorageOptions, SweepResult};
use nvmem::fitkit::{self, FitOptions, FitResult};
use nvmem::sequence::{self, Bindings, SequenceIR};
use nvmem::spin::{Register, TransitionLabel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NvmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Runtime = 4,
    NotConverged = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn fail(status: NvmStatus, msg: impl Into<String>) -> NvmStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> NvmStatus) -> NvmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(NvmStatus::Panic, msg)
        }
    }
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next `nvm_*` call on the same thread.
#[no_mangle]
pub extern "C" fn nvm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nvm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Simulation parameters.
pub struct NvmSetup {
    inner: Setup,
}

/// One experiment curve.
pub struct NvmSweep {
    inner: SweepResult,
}

/// A parsed pulse sequence.
pub struct NvmSequence {
    inner: SequenceIR,
}

unsafe fn cstr<'a>(p: *const c_char) -> Result<&'a str, NvmStatus> {
    if p.is_null() {
        return Err(fail(NvmStatus::NullPointer, "string argument is NULL"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(NvmStatus::InvalidArgument, "string is not UTF-8"))
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], NvmStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(NvmStatus::NullPointer, "array argument is NULL"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! deref {
    ($p:expr) => {{
        if $p.is_null() {
            return fail(NvmStatus::NullPointer, concat!(stringify!($p), " is NULL"));
        }
        &*$p
    }};
}

fn runtime<E: std::fmt::Display>(e: E) -> NvmStatus {
    fail(NvmStatus::Runtime, e.to_string())
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> NvmStatus {
    *out = Box::into_raw(Box::new(v));
    NvmStatus::Ok
}

/// Default parameters.
#[no_mangle]
pub unsafe extern "C" fn nvm_setup_new(out: *mut *mut NvmSetup) -> NvmStatus {
    guard(|| {
        if out.is_null() {
            return fail(NvmStatus::NullPointer, "out is NULL");
        }
        put(out, NvmSetup { inner: Setup::default() })
    })
}

/// Parameters from a TOML run configuration. Config errors return
/// `NVM_STATUS_PARSE` with a `file:line:col` message.
#[no_mangle]
pub unsafe extern "C" fn nvm_setup_load(path: *const c_char, out: *mut *mut NvmSetup) -> NvmStatus {
    guard(|| {
        let path = try_ffi!(cstr(path));
        if out.is_null() {
            return fail(NvmStatus::NullPointer, "out is NULL");
        }
        match RunConfig::load(Path::new(path)) {
            Ok(c) => put(out, NvmSetup { inner: c.setup }),
            Err(e) => fail(NvmStatus::Parse, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn nvm_setup_free(setup: *mut NvmSetup) {
    if !setup.is_null() {
        drop(Box::from_raw(setup));
    }
}

/// Sets a numeric parameter in SI units. Names: `t1_e`, `t2_pure_c`,
/// `t2star_n`, `t2star_e`, `field` (re-calibrates the secular coupling),
/// `alpha`, `beta`, `gamma`, `mw_rabi`, `rf_rabi`, `init_laser`,
/// `cycle_laser`, `cycles`.
#[no_mangle]
pub unsafe extern "C" fn nvm_setup_set(setup: *mut NvmSetup, name: *const c_char, value: f64) -> NvmStatus {
    guard(|| {
        if setup.is_null() {
            return fail(NvmStatus::NullPointer, "setup is NULL");
        }
        let s = &mut (*setup).inner;
        let name = try_ffi!(cstr(name));
        let mut next = s.clone();
        let r = &mut next.register;
        match name {
            "t1_e" => r.t1_e = value,
            "t2_pure_c" => r.t2_pure_c = value,
            "t2star_n" => r.t2star_n = value,
            "t2star_e" => r.t2star_e = value,
            "field" => {
                r.field = value;
                match r.calibrated() {
                    Ok(c) => *r = c,
                    Err(e) => return fail(NvmStatus::InvalidArgument, e.to_string()),
                }
            }
            "alpha" => next.rates.alpha = value,
            "beta" => next.rates.beta = value,
            "gamma" => next.rates.gamma = value,
            "mw_rabi" => next.mw_rabi = value,
            "rf_rabi" => next.rf_rabi = value,
            "init_laser" => next.init_laser = value,
            "cycle_laser" => next.cycle_laser = value,
            "cycles" if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 => {
                next.cycles = value as u32
            }
            _ => return fail(NvmStatus::InvalidArgument, format!("unknown or invalid parameter `{name}`")),
        }
        if let Err(e) = next.register.validate() {
            return fail(NvmStatus::InvalidArgument, e.to_string());
        }
        if let Err(e) = next.rates.validate() {
            return fail(NvmStatus::InvalidArgument, e.to_string());
        }
        *s = next;
        NvmStatus::Ok
    })
}

/// Numeric hyperfine enhancement of the RF1 coupling.
#[no_mangle]
pub unsafe extern "C" fn nvm_enhancement(setup: *const NvmSetup, out: *mut f64) -> NvmStatus {
    guard(|| {
        let s = deref!(setup);
        if out.is_null() {
            return fail(NvmStatus::NullPointer, "out is NULL");
        }
        let reg = try_ffi!(Register::new(s.inner.register).map_err(runtime));
        *out = try_ffi!(reg.coupling(TransitionLabel::Rf1).map_err(runtime));
        NvmStatus::Ok
    })
}

/// Closed-form pumping populations `(0↑, 0↓, 1↑, 1↓)` after a laser pulse
/// of `t` seconds from the swapped state. Rates in 1/s.
#[no_mangle]
pub unsafe extern "C" fn nvm_analytic_populations(
    alpha: f64,
    beta: f64,
    gamma: f64,
    t: f64,
    out: *mut f64,
) -> NvmStatus {
    guard(|| {
        if out.is_null() {
            return fail(NvmStatus::NullPointer, "out is NULL");
        }
        let r = RateParams { alpha, beta, gamma };
        match analytic_populations(&r, t) {
            Ok(p) => {
                std::slice::from_raw_parts_mut(out, 4).copy_from_slice(&p.0);
                NvmStatus::Ok
            }
            Err(e) => fail(NvmStatus::InvalidArgument, e.to_string()),
        }
    })
}

fn experiment_status(e: experiments::ExperimentError) -> NvmStatus {
    match e {
        experiments::ExperimentError::Invalid(m) => fail(NvmStatus::InvalidArgument, m),
        other => runtime(other),
    }
}

/// Nuclear Rabi oscillation at effective Rabi frequency `rabi` (Hz).
#[no_mangle]
pub unsafe extern "C" fn nvm_run_rabi(
    setup: *const NvmSetup,
    rabi: f64,
    durations: *const f64,
    len: usize,
    out: *mut *mut NvmSweep,
) -> NvmStatus {
    guard(|| {
        let s = &deref!(setup).inner;
        let t = try_ffi!(slice(durations, len));
        if out.is_null() {
            return fail(NvmStatus::NullPointer, "out is NULL");
        }
        let reg = try_ffi!(s.register().map_err(experiment_status));
        let k = try_ffi!(reg.coupling(TransitionLabel::Rf1).map_err(runtime));
        match experiments::run_rabi(s, rabi / k, t) {
            Ok(r) => put(out, NvmSweep { inner: r }),
            Err(e) => experiment_status(e),
        }
    })
}

/// `|0,↑⟩` population after 0…`cycles` purification cycles.
#[no_mangle]
pub unsafe extern "C" fn nvm_run_purification(
    setup: *const NvmSetup,
    cycles: u32,
    laser: f64,
    out: *mut *mut NvmSweep,
) -> NvmStatus {
    guard(|| {
        let s = &deref!(setup).inner;
        if out.is_null() {
            return fail(NvmStatus::NullPointer, "out is NULL");
        }
        match experiments::run_repeated_init(s, cycles, laser) {
            Ok((r, _)) => put(out, NvmSweep { inner: r }),
            Err(e) => experiment_status(e),
        }
    })
}

/// Mean fidelity of the four equatorial states under the loss-budget
/// preset (`lossless = 0`) or the lossless pipeline.
#[no_mangle]
pub unsafe extern "C" fn nvm_transfer_fidelity(
    setup: *const NvmSetup,
    lossless: bool,
    per_state: *mut f64,
    mean: *mut f64,
) -> NvmStatus {
    guard(|| {
        let s = &deref!(setup).inner;
        if mean.is_null() {
            return fail(NvmStatus::NullPointer, "mean is NULL");
        }
        let budget = if lossless { LossBudget::none() } else { LossBudget::preset() };
        match experiments::transfer_fidelity(s, &budget, 150e3, 20e-6) {
            Ok(rep) => {
                *mean = rep.mean_fidelity;
                if !per_state.is_null() {
                    for (i, st) in rep.states.iter().enumerate() {
                        *per_state.add(i) = st.fidelity;
                    }
                }
                NvmStatus::Ok
            }
            Err(e) => experiment_status(e),
        }
    })
}

/// CPMG storage ensemble; writes the fitted decay constant to `tau`.
#[no_mangle]
pub unsafe extern "C" fn nvm_run_cpmg(
    setup: *const NvmSetup,
    n_pulses: u32,
    times: *const f64,
    len: usize,
    ensemble: usize,
    seed: u64,
    out: *mut *mut NvmSweep,
    tau: *mut f64,
) -> NvmStatus {
    guard(|| {
        let s = &deref!(setup).inner;
        let t = try_ffi!(slice(times, len));
        if out.is_null() {
            return fail(NvmStatus::NullPointer, "out is NULL");
        }
        let opts = StorageOptions {
            ensemble,
            seed,
            ..Default::default()
        };
        match experiments::run_cpmg_storage(s, n_pulses, t, &opts) {
            Ok((r, f)) => {
                if !tau.is_null() {
                    *tau = f.time_constant;
                }
                put(out, NvmSweep { inner: r })
            }
            Err(e) => experiment_status(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn nvm_sweep_len(sweep: *const NvmSweep) -> usize {
    if sweep.is_null() {
        0
    } else {
        (*sweep).inner.x.len()
    }
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, cap: usize) -> NvmStatus {
    if buf.is_null() {
        return fail(NvmStatus::NullPointer, "buffer is NULL");
    }
    if cap < src.len() {
        return fail(
            NvmStatus::InvalidArgument,
            format!("buffer holds {cap} values, need {}", src.len()),
        );
    }
    std::slice::from_raw_parts_mut(buf, src.len()).copy_from_slice(src);
    NvmStatus::Ok
}

/// Copies the sweep axis into `buf` (capacity `cap`).
#[no_mangle]
pub unsafe extern "C" fn nvm_sweep_x(sweep: *const NvmSweep, buf: *mut f64, cap: usize) -> NvmStatus {
    guard(|| copy_out(&deref!(sweep).inner.x, buf, cap))
}

/// Copies the signal into `buf` (capacity `cap`).
#[no_mangle]
pub unsafe extern "C" fn nvm_sweep_y(sweep: *const NvmSweep, buf: *mut f64, cap: usize) -> NvmStatus {
    guard(|| copy_out(&deref!(sweep).inner.y, buf, cap))
}

/// Headline number by key, e.g. `rabi_frequency_hz` or `p0_up`.
#[no_mangle]
pub unsafe extern "C" fn nvm_sweep_summary(sweep: *const NvmSweep, key: *const c_char, out: *mut f64) -> NvmStatus {
    guard(|| {
        let r = &deref!(sweep).inner;
        let key = try_ffi!(cstr(key));
        if out.is_null() {
            return fail(NvmStatus::NullPointer, "out is NULL");
        }
        match r.summary(key) {
            Some(v) => {
                *out = v;
                NvmStatus::Ok
            }
            None => fail(NvmStatus::InvalidArgument, format!("no summary value `{key}`")),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn nvm_sweep_free(sweep: *mut NvmSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// Parses sequence text. Syntax errors return `NVM_STATUS_PARSE` with a
/// `line:col` message.
#[no_mangle]
pub unsafe extern "C" fn nvm_sequence_parse(text: *const c_char, out: *mut *mut NvmSequence) -> NvmStatus {
    guard(|| {
        let text = try_ffi!(cstr(text));
        if out.is_null() {
            return fail(NvmStatus::NullPointer, "out is NULL");
        }
        match sequence::parse_sequence(text) {
            Ok(ir) => put(out, NvmSequence { inner: ir }),
            Err(e) => fail(NvmStatus::Parse, e.render("<input>")),
        }
    })
}

/// Number of pulse events with every sweep variable at its first value.
#[no_mangle]
pub unsafe extern "C" fn nvm_sequence_event_count(seq: *const NvmSequence, out: *mut usize) -> NvmStatus {
    guard(|| {
        let ir = &deref!(seq).inner;
        if out.is_null() {
            return fail(NvmStatus::NullPointer, "out is NULL");
        }
        let b: Bindings = ir.sweeps.iter().map(|s| (s.name.clone(), s.values()[0])).collect();
        match sequence::resolve(ir, &b, &Default::default()) {
            Ok(ev) => {
                *out = ev.len();
                NvmStatus::Ok
            }
            Err(e) => fail(NvmStatus::Parse, e.render("<input>")),
        }
    })
}

/// Canonical text of the sequence. Writes at most `cap` bytes including
/// the NUL; `needed` receives the full size including the NUL.
#[no_mangle]
pub unsafe extern "C" fn nvm_sequence_emit(
    seq: *const NvmSequence,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> NvmStatus {
    guard(|| {
        let text = sequence::emit(&deref!(seq).inner);
        let bytes = text.as_bytes();
        if !needed.is_null() {
            *needed = bytes.len() + 1;
        }
        if buf.is_null() || cap == 0 {
            return if needed.is_null() {
                fail(NvmStatus::NullPointer, "buffer and needed are NULL")
            } else {
                NvmStatus::Ok
            };
        }
        if cap < bytes.len() + 1 {
            return fail(NvmStatus::InvalidArgument, "buffer too small");
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, bytes.len());
        *buf.add(bytes.len()) = 0;
        NvmStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn nvm_sequence_free(seq: *mut NvmSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

unsafe fn fit_out(r: Result<FitResult, fitkit::FitError>, params: *mut f64, n: usize) -> NvmStatus {
    let r = match r {
        Ok(r) => r,
        Err(e) => return fail(NvmStatus::InvalidArgument, e.to_string()),
    };
    if params.is_null() {
        return fail(NvmStatus::NullPointer, "params is NULL");
    }
    let v = r.values();
    std::slice::from_raw_parts_mut(params, n).copy_from_slice(&v[..n]);
    if r.converged {
        NvmStatus::Ok
    } else {
        fail(NvmStatus::NotConverged, r.message.unwrap_or_else(|| "fit did not converge".into()))
    }
}

/// Cosine fit; `params` receives amplitude, frequency, phase, offset.
#[no_mangle]
pub unsafe extern "C" fn nvm_fit_cosine(x: *const f64, y: *const f64, len: usize, params: *mut f64) -> NvmStatus {
    guard(|| {
        let (x, y) = (try_ffi!(slice(x, len)), try_ffi!(slice(y, len)));
        fit_out(fitkit::fit_cosine(x, y, None, &FitOptions::default()), params, 4)
    })
}

/// Exponential fit; `params` receives amplitude, time constant, offset.
#[no_mangle]
pub unsafe extern "C" fn nvm_fit_exponential(x: *const f64, y: *const f64, len: usize, params: *mut f64) -> NvmStatus {
    guard(|| {
        let (x, y) = (try_ffi!(slice(x, len)), try_ffi!(slice(y, len)));
        fit_out(fitkit::fit_exponential(x, y, None, &FitOptions::default()), params, 3)
    })
}

/// Pumping-rate fit to the two tomography curves; `params` receives
/// alpha, beta, gamma (1/s).
#[no_mangle]
pub unsafe extern "C" fn nvm_fit_rates(
    t: *const f64,
    total: *const f64,
    up: *const f64,
    len: usize,
    params: *mut f64,
) -> NvmStatus {
    guard(|| {
        let t = try_ffi!(slice(t, len));
        let total = try_ffi!(slice(total, len));
        let up = try_ffi!(slice(up, len));
        fit_out(fitkit::fit_rate_params(t, total, up, &FitOptions::default()), params, 3)
    })
}
