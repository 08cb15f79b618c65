//! Exported C functions.
//!
//! Conventions:
//! - every fallible call returns a `QatStatus`; outputs go through pointers;
//! - `QatHamiltonian` is an opaque handle created by the constructors and
//!   released with `qat_hamiltonian_free`;
//! - the last error message is kept per thread and read with
//!   `qat_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::os::raw::c_int;

use qat::analysis;
use qat::circuits::{self, ScramblingMode, ThermaliseConfig};
use qat::error::Error;
use qat::hamiltonians::Hamiltonian;
use qat::state::PureState;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CapacityExceeded = 3,
    Internal = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn status_of(err: &Error) -> QatStatus {
    match err {
        Error::Capacity(_) => QatStatus::CapacityExceeded,
        Error::Io(_) | Error::Json(_) => QatStatus::Internal,
        _ => QatStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> QatStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

/// Opaque Hamiltonian handle.
pub struct QatHamiltonian(Hamiltonian);

/// Message of the most recent error on this thread; the pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qat_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qat_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Creates a built-in Hamiltonian ("h1" or "h2").
///
/// # Safety
/// `name` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qat_hamiltonian_builtin(
    name: *const c_char,
    out: *mut *mut QatHamiltonian,
) -> QatStatus {
    if name.is_null() || out.is_null() {
        set_error("null pointer argument");
        return QatStatus::NullPointer;
    }
    let name = match unsafe { CStr::from_ptr(name) }.to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("name is not valid UTF-8");
            return QatStatus::InvalidArgument;
        }
    };
    match qat::hamiltonians::builtin(name) {
        Ok(h) => {
            unsafe { *out = Box::into_raw(Box::new(QatHamiltonian(h))) };
            QatStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Builds a Hamiltonian from a dense row-major matrix of interleaved
/// (re, im) pairs; `dim` is the matrix dimension (a power of two).
///
/// # Safety
/// `entries` must point to `2 * dim * dim` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qat_hamiltonian_from_dense(
    entries: *const f64,
    dim: usize,
    out: *mut *mut QatHamiltonian,
) -> QatStatus {
    if entries.is_null() || out.is_null() {
        set_error("null pointer argument");
        return QatStatus::NullPointer;
    }
    let raw = unsafe { std::slice::from_raw_parts(entries, 2 * dim * dim) };
    match qat::hamiltonians::from_interleaved(raw, dim, qat::hamiltonians::FILE_HERMITIAN_TOL) {
        Ok(h) => {
            unsafe { *out = Box::into_raw(Box::new(QatHamiltonian(h))) };
            QatStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Releases a Hamiltonian handle; a null handle is a no-op.
///
/// # Safety
/// `handle` must come from a `qat_hamiltonian_*` constructor and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qat_hamiltonian_free(handle: *mut QatHamiltonian) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Number of qubits of the Hamiltonian.
///
/// # Safety
/// `handle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qat_hamiltonian_qubits(handle: *const QatHamiltonian) -> c_int {
    if handle.is_null() {
        return -1;
    }
    unsafe { &*handle }.0.n_qubits() as c_int
}

/// Copies the ascending eigenvalues into `out` (length `len >= dim`).
///
/// # Safety
/// `handle` must be live and `out` must hold at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qat_hamiltonian_eigenvalues(
    handle: *const QatHamiltonian,
    out: *mut f64,
    len: usize,
) -> QatStatus {
    if handle.is_null() || out.is_null() {
        set_error("null pointer argument");
        return QatStatus::NullPointer;
    }
    let h = &unsafe { &*handle }.0;
    let values = h.eigenvalues();
    if len < values.len() {
        set_error("output buffer too small");
        return QatStatus::InvalidArgument;
    }
    unsafe { std::slice::from_raw_parts_mut(out, values.len()) }.copy_from_slice(values);
    QatStatus::Ok
}

/// Perceptron activation angle q(theta) = arctan(tan^2 theta).
#[no_mangle]
pub extern "C" fn qat_q_activation(theta: f64) -> f64 {
    analysis::q_activation(theta)
}

/// Perceptron success probability cos^4 + sin^4.
#[no_mangle]
pub extern "C" fn qat_p_success(theta: f64) -> f64 {
    analysis::p_success(theta)
}

/// Preactivation sum x.w + bias.
///
/// # Safety
/// `inputs` and `weights` must point to `len` doubles each; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qat_preactivation(
    inputs: *const f64,
    weights: *const f64,
    len: usize,
    bias: f64,
    out: *mut f64,
) -> QatStatus {
    if inputs.is_null() || weights.is_null() || out.is_null() {
        set_error("null pointer argument");
        return QatStatus::NullPointer;
    }
    let xs = unsafe { std::slice::from_raw_parts(inputs, len) };
    let ws = unsafe { std::slice::from_raw_parts(weights, len) };
    match qat::experiments::preactivation(xs, ws, bias) {
        Ok(theta) => {
            unsafe { *out = theta };
            QatStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Noiseless perceptron thermalisation series from input |0>: writes
/// simulated fidelity, predicted fidelity and the angle estimate for
/// T = 1..=iterations into the three buffers (each holding `iterations`
/// doubles; `predicted`/`q_estimate` may be null).
///
/// # Safety
/// Non-null buffers must hold at least `iterations` doubles.
#[no_mangle]
pub unsafe extern "C" fn qat_perceptron_series(
    theta: f64,
    iterations: u32,
    trailing_reset: bool,
    simulated: *mut f64,
    predicted: *mut f64,
    q_estimate: *mut f64,
) -> QatStatus {
    if simulated.is_null() {
        set_error("null pointer argument");
        return QatStatus::NullPointer;
    }
    let config = match ThermaliseConfig::new(iterations) {
        Ok(c) => c.with_trailing_reset(trailing_reset),
        Err(e) => return fail(e),
    };
    let input = match PureState::zero(1) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    match circuits::simulate_perceptron_thermalise(theta, &config, &input, None) {
        Ok(run) => {
            let n = iterations as usize;
            let sim = unsafe { std::slice::from_raw_parts_mut(simulated, n) };
            for (i, p) in run.series.iter().enumerate() {
                sim[i] = p.fidelity_sim;
            }
            if !predicted.is_null() {
                let pred = unsafe { std::slice::from_raw_parts_mut(predicted, n) };
                for (i, p) in run.series.iter().enumerate() {
                    pred[i] = p.fidelity_pred;
                }
            }
            if !q_estimate.is_null() {
                let qs = unsafe { std::slice::from_raw_parts_mut(q_estimate, n) };
                for (i, p) in run.series.iter().enumerate() {
                    qs[i] = p.q_estimate.unwrap_or(f64::NAN);
                }
            }
            QatStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Noiseless groundstate thermalisation series: simulated and predicted
/// fidelity for T = 1..=iterations. `scramble_mode` 0 = exact eigenbasis,
/// 1 = local Hadamards.
///
/// # Safety
/// `handle` must be live; non-null buffers must hold `iterations` doubles.
#[no_mangle]
pub unsafe extern "C" fn qat_groundstate_series(
    handle: *const QatHamiltonian,
    precision: usize,
    iterations: u32,
    scramble_mode: c_int,
    simulated: *mut f64,
    predicted: *mut f64,
) -> QatStatus {
    if handle.is_null() || simulated.is_null() {
        set_error("null pointer argument");
        return QatStatus::NullPointer;
    }
    let mode = match scramble_mode {
        0 => ScramblingMode::ExactEigenbasis,
        1 => ScramblingMode::Hadamard,
        other => {
            set_error(&format!("unknown scramble mode {other}"));
            return QatStatus::InvalidArgument;
        }
    };
    let config = match ThermaliseConfig::new(iterations) {
        Ok(c) => c.with_precision(precision).with_scrambling(mode),
        Err(e) => return fail(e),
    };
    let h = &unsafe { &*handle }.0;
    match circuits::simulate_groundstate_thermalise(h, &config, None) {
        Ok(run) => {
            let n = iterations as usize;
            let sim = unsafe { std::slice::from_raw_parts_mut(simulated, n) };
            for (i, p) in run.series.iter().enumerate() {
                sim[i] = p.fidelity_sim;
            }
            if !predicted.is_null() {
                let pred = unsafe { std::slice::from_raw_parts_mut(predicted, n) };
                for (i, p) in run.series.iter().enumerate() {
                    pred[i] = p.fidelity_pred;
                }
            }
            QatStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Simulated success probability of depth-k fixed-point amplification of a
/// perceptron unit with per-application success `p0`, with an optional
/// phase-angle error.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qat_oaa_success(
    p0: f64,
    k: u32,
    angle_error: f64,
    out: *mut f64,
) -> QatStatus {
    if out.is_null() {
        set_error("null pointer argument");
        return QatStatus::NullPointer;
    }
    let theta = match qat::experiments::theta_for_success(p0) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let unit = circuits::build_perceptron_unit(theta);
    let input = match PureState::zero(1) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    match circuits::oaa_with_angle_error(&unit, k, angle_error, &input) {
        Ok(p) => {
            unsafe { *out = p };
            QatStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Closed-form amplified success probability 1 - (1 - p0)^(3^k).
#[no_mangle]
pub extern "C" fn qat_oaa_predicted(p0: f64, k: u32) -> f64 {
    1.0 - (1.0 - p0).powi(3i32.saturating_pow(k))
}
