//! C ABI over the jrpd library: opaque handles, status codes, and UTF-8 JSON
//! strings at the boundary.
//!
//! Conventions:
//! - Handles (`JrpdInstance`, `JrpdSchedule`) are opaque; free them with the
//!   matching `*_free` function.
//! - Strings returned through out-parameters are NUL-terminated, allocated by
//!   this library, and must be released with `jrpd_string_free`.
//! - Functions return `JrpdStatus`; on any non-OK status a human-readable
//!   message is available from `jrpd_last_error_message`.
//! - Exact costs cross the boundary as rational strings (`"p/q"` or `"p"`).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use jrpd::algorithms::{is_registered, make_algorithm};
use jrpd::engine::{simulate, ItemCatalog, Mode, SimError};
use jrpd::generators::{
    gen_adversary, gen_cheap_expensive, gen_random, gen_red_black, AdversaryCase, NoiseModel,
    RandomConfig,
};
use jrpd::metrics::metrics_report;
use jrpd::model::validate_instance;
use jrpd::opt::{optimal_bounds, optimal_exact, OptError};
use jrpd::schedule::{schedule_cost, validate_schedule};
use jrpd::weight::Rational;
use jrpd::{Instance, Schedule, Weight};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum JrpdStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidInstance = 4,
    UnknownAlgorithm = 5,
    ProtocolViolation = 6,
    OracleLimitExceeded = 7,
    Infeasible = 8,
    InvalidArgument = 9,
}

/// Prediction noise selector for `jrpd_gen_random`.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum JrpdNoise {
    /// Predictions equal deadlines; `noise_param` ignored.
    Exact = 0,
    /// Uniform offset in `[-noise_param, noise_param]`, clamped to arrivals.
    Shift = 1,
    /// Random prediction swaps toward `noise_param` raw request inversions.
    TargetInversions = 2,
}

/// Adversary outcome selector.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum JrpdAdversaryCase {
    NoInversions = 1,
    ManyInversions = 2,
}

/// Prediction-error counters of one instance.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct JrpdMetrics {
    pub request_inversions: u64,
    pub request_inversions_floored: u64,
    pub item_inversions: u64,
    pub instantaneous_item_inversions: u64,
    /// Earliest tick attaining the instantaneous maximum.
    pub peak_time: i64,
    /// Instantaneous item inversions floored at 1.
    pub eta: u64,
}

/// Opaque instance handle.
pub struct JrpdInstance {
    inner: Instance,
}

/// Opaque schedule handle.
pub struct JrpdSchedule {
    inner: Schedule,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(message).expect("NUL stripped"));
    });
}

fn fail(status: JrpdStatus, message: impl Into<String>) -> JrpdStatus {
    set_error(message);
    status
}

/// Message describing the most recent error on this thread, or NULL. The
/// caller owns the returned string (release with `jrpd_string_free`).
#[no_mangle]
pub extern "C" fn jrpd_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(message) => message.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must have been returned by a jrpd function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn jrpd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn export_string(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " "))
        .expect("NUL stripped")
        .into_raw()
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, JrpdStatus> {
    if ptr.is_null() {
        return Err(fail(JrpdStatus::NullArgument, "string argument is NULL"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(JrpdStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn export_instance(instance: Instance, out: *mut *mut JrpdInstance) -> JrpdStatus {
    if out.is_null() {
        return fail(JrpdStatus::NullArgument, "out pointer is NULL");
    }
    unsafe {
        *out = Box::into_raw(Box::new(JrpdInstance { inner: instance }));
    }
    JrpdStatus::Ok
}

unsafe fn borrow_instance<'a>(handle: *const JrpdInstance) -> Result<&'a Instance, JrpdStatus> {
    if handle.is_null() {
        return Err(fail(JrpdStatus::NullArgument, "instance handle is NULL"));
    }
    Ok(&(*handle).inner)
}

unsafe fn borrow_schedule<'a>(handle: *const JrpdSchedule) -> Result<&'a Schedule, JrpdStatus> {
    if handle.is_null() {
        return Err(fail(JrpdStatus::NullArgument, "schedule handle is NULL"));
    }
    Ok(&(*handle).inner)
}

/// Parses an instance from its JSON representation and validates it.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn jrpd_instance_from_json(
    json: *const c_char,
    out: *mut *mut JrpdInstance,
) -> JrpdStatus {
    let text = match read_str(json) {
        Ok(text) => text,
        Err(status) => return status,
    };
    let mut instance: Instance = match serde_json::from_str(text) {
        Ok(instance) => instance,
        Err(err) => return fail(JrpdStatus::ParseError, err.to_string()),
    };
    if instance.tie_permutation.is_empty() {
        instance.tie_permutation = (0..instance.items.len() as u32).collect();
    }
    let violations = validate_instance(&instance);
    if !violations.is_empty() {
        let list = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return fail(JrpdStatus::InvalidInstance, list);
    }
    export_instance(instance, out)
}

/// Serializes an instance to JSON. Returns NULL when the handle is NULL.
///
/// # Safety
/// `instance` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn jrpd_instance_to_json(instance: *const JrpdInstance) -> *mut c_char {
    match borrow_instance(instance) {
        Ok(inner) => export_string(serde_json::to_string(inner).expect("serializable")),
        Err(_) => ptr::null_mut(),
    }
}

/// # Safety
/// `instance` must be a live handle or NULL; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn jrpd_instance_free(instance: *mut JrpdInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// # Safety
/// `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn jrpd_instance_item_count(instance: *const JrpdInstance) -> usize {
    borrow_instance(instance)
        .map(|i| i.item_count())
        .unwrap_or(0)
}

/// # Safety
/// `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn jrpd_instance_request_count(instance: *const JrpdInstance) -> usize {
    borrow_instance(instance)
        .map(|i| i.request_count())
        .unwrap_or(0)
}

/// Red/black adversarial family (2k items, k + k^2 requests).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn jrpd_gen_red_black(k: u32, out: *mut *mut JrpdInstance) -> JrpdStatus {
    if k == 0 {
        return fail(JrpdStatus::InvalidArgument, "red/black requires k >= 1");
    }
    export_instance(gen_red_black(k), out)
}

/// Cheap/expensive tightness family (2n items, 2n^2 requests).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn jrpd_gen_cheap_expensive(
    n: u32,
    out: *mut *mut JrpdInstance,
) -> JrpdStatus {
    if n < 2 {
        return fail(
            JrpdStatus::InvalidArgument,
            "cheap/expensive requires n >= 2",
        );
    }
    export_instance(gen_cheap_expensive(n), out)
}

/// Seeded random instance. `noise_param` is the shift bound or the inversion
/// budget depending on `noise`; `noise_seed` seeds the swap stream for
/// `TargetInversions`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn jrpd_gen_random(
    items: u32,
    requests: u32,
    horizon: i64,
    weight_grid: u32,
    noise: JrpdNoise,
    noise_param: i64,
    noise_seed: u64,
    seed: u64,
    out: *mut *mut JrpdInstance,
) -> JrpdStatus {
    if items == 0 || requests == 0 || horizon < 1 || weight_grid == 0 {
        return fail(
            JrpdStatus::InvalidArgument,
            "items, requests, horizon, grid must be >= 1",
        );
    }
    let noise = match noise {
        JrpdNoise::Exact => NoiseModel::Exact,
        JrpdNoise::Shift => NoiseModel::Shift {
            max_offset: noise_param.abs(),
        },
        JrpdNoise::TargetInversions => NoiseModel::TargetInversions {
            budget: noise_param.max(0) as u64,
            seed: noise_seed,
        },
    };
    let config = RandomConfig {
        items,
        requests,
        horizon,
        weight_grid,
        noise,
        seed,
    };
    export_instance(gen_random(&config).instance, out)
}

/// Behavior-adaptive lower-bound instance against a registered algorithm.
/// `n` must be a perfect square and `c_numer/c_denom >= 1`. On success the
/// chosen case and the per-phase service count are written through the
/// optional out-pointers.
///
/// # Safety
/// `algorithm` must be a valid NUL-terminated string; `out` must be valid;
/// `out_case`/`out_services_per_phase` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn jrpd_gen_adversary(
    algorithm: *const c_char,
    n: u32,
    c_numer: i64,
    c_denom: i64,
    out: *mut *mut JrpdInstance,
    out_case: *mut JrpdAdversaryCase,
    out_services_per_phase: *mut u32,
) -> JrpdStatus {
    let name = match read_str(algorithm) {
        Ok(name) => name,
        Err(status) => return status,
    };
    if !is_registered(name) {
        return fail(
            JrpdStatus::UnknownAlgorithm,
            format!("unknown algorithm `{name}`"),
        );
    }
    if c_denom == 0 {
        return fail(JrpdStatus::InvalidArgument, "c denominator must be nonzero");
    }
    let c = Rational::new(c_numer, c_denom);
    let factory = |catalog: &ItemCatalog| make_algorithm(name, catalog).expect("registered above");
    match gen_adversary(factory, n, c) {
        Ok(outcome) => {
            if !out_case.is_null() {
                *out_case = match outcome.case {
                    AdversaryCase::Case1NoInversions => JrpdAdversaryCase::NoInversions,
                    AdversaryCase::Case2ManyInversions => JrpdAdversaryCase::ManyInversions,
                };
            }
            if !out_services_per_phase.is_null() {
                *out_services_per_phase = outcome.per_phase_service_count;
            }
            export_instance(outcome.instance, out)
        }
        Err(err) => fail(JrpdStatus::InvalidArgument, err.to_string()),
    }
}

/// Runs a registered algorithm on an instance. Writes the schedule handle
/// through `out_schedule` and, unless NULL, the exact total cost as a
/// rational string through `out_cost`.
///
/// # Safety
/// `instance` must be a live handle; `algorithm` a valid string;
/// `out_schedule` valid; `out_cost` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn jrpd_run(
    instance: *const JrpdInstance,
    algorithm: *const c_char,
    clairvoyant: bool,
    out_schedule: *mut *mut JrpdSchedule,
    out_cost: *mut *mut c_char,
) -> JrpdStatus {
    let instance = match borrow_instance(instance) {
        Ok(instance) => instance,
        Err(status) => return status,
    };
    let name = match read_str(algorithm) {
        Ok(name) => name,
        Err(status) => return status,
    };
    if out_schedule.is_null() {
        return fail(JrpdStatus::NullArgument, "out_schedule is NULL");
    }
    if !is_registered(name) {
        return fail(
            JrpdStatus::UnknownAlgorithm,
            format!("unknown algorithm `{name}`"),
        );
    }
    let catalog = ItemCatalog::of(instance);
    let mut alg = make_algorithm(name, &catalog).expect("registered above");
    let mode = if clairvoyant {
        Mode::Clairvoyant
    } else {
        Mode::Predicted
    };
    match simulate(instance, alg.as_mut(), mode) {
        Ok((schedule, _)) => {
            let cost = schedule_cost(&schedule, instance)
                .expect("engine output")
                .total;
            if !out_cost.is_null() {
                *out_cost = export_string(cost.to_string());
            }
            *out_schedule = Box::into_raw(Box::new(JrpdSchedule { inner: schedule }));
            JrpdStatus::Ok
        }
        Err(SimError::Protocol(violation)) => {
            fail(JrpdStatus::ProtocolViolation, violation.to_string())
        }
        Err(err) => fail(JrpdStatus::InvalidInstance, err.to_string()),
    }
}

/// Parses a schedule from JSON.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn jrpd_schedule_from_json(
    json: *const c_char,
    out: *mut *mut JrpdSchedule,
) -> JrpdStatus {
    let text = match read_str(json) {
        Ok(text) => text,
        Err(status) => return status,
    };
    if out.is_null() {
        return fail(JrpdStatus::NullArgument, "out pointer is NULL");
    }
    match serde_json::from_str::<Schedule>(text) {
        Ok(schedule) => {
            *out = Box::into_raw(Box::new(JrpdSchedule { inner: schedule }));
            JrpdStatus::Ok
        }
        Err(err) => fail(JrpdStatus::ParseError, err.to_string()),
    }
}

/// Serializes a schedule to JSON. Returns NULL when the handle is NULL.
///
/// # Safety
/// `schedule` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn jrpd_schedule_to_json(schedule: *const JrpdSchedule) -> *mut c_char {
    match borrow_schedule(schedule) {
        Ok(inner) => export_string(serde_json::to_string(inner).expect("serializable")),
        Err(_) => ptr::null_mut(),
    }
}

/// # Safety
/// `schedule` must be a live handle or NULL; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn jrpd_schedule_free(schedule: *mut JrpdSchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}

/// # Safety
/// `schedule` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn jrpd_schedule_service_count(schedule: *const JrpdSchedule) -> usize {
    borrow_schedule(schedule)
        .map(|s| s.services.len())
        .unwrap_or(0)
}

/// Feasibility check of a schedule against an instance. Returns `Ok` when
/// feasible (writing the exact cost unless `out_cost` is NULL) and
/// `Infeasible` with the violation list in the last-error message otherwise.
///
/// # Safety
/// Both handles must be live; `out_cost` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn jrpd_verify(
    instance: *const JrpdInstance,
    schedule: *const JrpdSchedule,
    out_cost: *mut *mut c_char,
) -> JrpdStatus {
    let instance = match borrow_instance(instance) {
        Ok(instance) => instance,
        Err(status) => return status,
    };
    let schedule = match borrow_schedule(schedule) {
        Ok(schedule) => schedule,
        Err(status) => return status,
    };
    let violations = validate_schedule(schedule, instance);
    if !violations.is_empty() {
        let list = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return fail(JrpdStatus::Infeasible, list);
    }
    if !out_cost.is_null() {
        let cost = schedule_cost(schedule, instance).expect("validated").total;
        *out_cost = export_string(cost.to_string());
    }
    JrpdStatus::Ok
}

/// Prediction-error metrics of an instance.
///
/// # Safety
/// `instance` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn jrpd_metrics(
    instance: *const JrpdInstance,
    out: *mut JrpdMetrics,
) -> JrpdStatus {
    let instance = match borrow_instance(instance) {
        Ok(instance) => instance,
        Err(status) => return status,
    };
    if out.is_null() {
        return fail(JrpdStatus::NullArgument, "out pointer is NULL");
    }
    let report = metrics_report(instance);
    *out = JrpdMetrics {
        request_inversions: report.request_inversions,
        request_inversions_floored: report.request_inversions_floored,
        item_inversions: report.item_inversions,
        instantaneous_item_inversions: report.instantaneous_item_inversions,
        peak_time: report.peak_time,
        eta: report.eta,
    };
    JrpdStatus::Ok
}

/// Exact offline optimum; refuses with `OracleLimitExceeded` when the
/// instance has more than `deadline_limit` distinct deadlines. Writes the
/// exact cost through `out_cost` and, unless NULL, a witness schedule handle
/// through `out_witness`.
///
/// # Safety
/// `instance` must be a live handle; `out_cost` must be valid; `out_witness`
/// may be NULL.
#[no_mangle]
pub unsafe extern "C" fn jrpd_opt_exact(
    instance: *const JrpdInstance,
    deadline_limit: u32,
    out_cost: *mut *mut c_char,
    out_witness: *mut *mut JrpdSchedule,
) -> JrpdStatus {
    let instance = match borrow_instance(instance) {
        Ok(instance) => instance,
        Err(status) => return status,
    };
    if out_cost.is_null() {
        return fail(JrpdStatus::NullArgument, "out_cost is NULL");
    }
    match optimal_exact(instance, deadline_limit as usize) {
        Ok(result) => {
            *out_cost = export_string(result.upper().to_string());
            if !out_witness.is_null() {
                *out_witness = Box::into_raw(Box::new(JrpdSchedule {
                    inner: result.witness().clone(),
                }));
            }
            JrpdStatus::Ok
        }
        Err(err @ OptError::TooManyDeadlines { .. }) => {
            fail(JrpdStatus::OracleLimitExceeded, err.to_string())
        }
        Err(err) => fail(JrpdStatus::InvalidInstance, err.to_string()),
    }
}

/// Certified bounds `lower <= OPT <= upper`; the upper bound is the cost of a
/// feasible witness.
///
/// # Safety
/// `instance` must be a live handle; `out_lower` and `out_upper` must be
/// valid; `out_witness` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn jrpd_opt_bounds(
    instance: *const JrpdInstance,
    out_lower: *mut *mut c_char,
    out_upper: *mut *mut c_char,
    out_witness: *mut *mut JrpdSchedule,
) -> JrpdStatus {
    let instance = match borrow_instance(instance) {
        Ok(instance) => instance,
        Err(status) => return status,
    };
    if out_lower.is_null() || out_upper.is_null() {
        return fail(JrpdStatus::NullArgument, "out_lower/out_upper is NULL");
    }
    match optimal_bounds(instance) {
        Ok(result) => {
            *out_lower = export_string(result.lower().to_string());
            *out_upper = export_string(result.upper().to_string());
            if !out_witness.is_null() {
                *out_witness = Box::into_raw(Box::new(JrpdSchedule {
                    inner: result.witness().clone(),
                }));
            }
            JrpdStatus::Ok
        }
        Err(err) => fail(JrpdStatus::InvalidInstance, err.to_string()),
    }
}

/// Raw request-inversion pair count of an instance (unfloored), exposed for
/// bindings that only need one number without the full metrics struct.
///
/// # Safety
/// `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn jrpd_request_inversions(instance: *const JrpdInstance) -> u64 {
    match borrow_instance(instance) {
        Ok(inner) => jrpd::metrics::request_inversions(inner).len() as u64,
        Err(_) => 0,
    }
}

// Keeps Weight linked into the ABI surface for cost parsing helpers below.
fn parse_cost(text: &str) -> Option<Weight> {
    text.parse().ok()
}

/// Compares two rational cost strings; returns -1, 0, 1, or
/// `i32::MIN` when either string does not parse.
///
/// # Safety
/// Both arguments must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn jrpd_cost_cmp(a: *const c_char, b: *const c_char) -> i32 {
    let (Ok(a), Ok(b)) = (read_str(a), read_str(b)) else {
        return i32::MIN;
    };
    match (parse_cost(a), parse_cost(b)) {
        (Some(a), Some(b)) => match a.cmp(&b) {
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        },
        _ => i32::MIN,
    }
}
