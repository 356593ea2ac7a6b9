//! The exported C surface.
//!
//! Conventions: every call returns a [`LevyqStatus`]; results come back
//! through out-pointers; handles are opaque and freed with their matching
//! `_free`. On any non-OK status, `levyq_last_error` returns a message for
//! the calling thread. Panics are caught at the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use levyq::limitlaw::{self, LimitLawEvaluator};
use levyq::model::{LevyModel, Regime};
use levyq::simulate::{self, OvershootSample, SimError};

/// Status codes returned by every `levyq_*` call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevyqStatus {
    Ok = 0,
    InvalidArgument = 1,
    ParseError = 2,
    ModelError = 3,
    MathError = 4,
    BudgetExhausted = 5,
    InternalPanic = 6,
}

/// Regime tag mirrored into C.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevyqRegime {
    Cramer = 0,
    PositiveDrift = 1,
    Neither = 2,
}

/// One overflow record in the flat sample buffer.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LevyqSample {
    pub undershoot: f64,
    pub overshoot: f64,
    pub passage_time: f64,
    pub weight: f64,
}

/// Opaque validated model handle.
pub struct LevyqModel {
    inner: LevyModel,
}

/// Opaque limit-law evaluator handle (thread-safe, immutable).
pub struct LevyqLimitLaw {
    inner: LimitLawEvaluator,
}

/// Opaque batch of overflow samples.
pub struct LevyqSamples {
    inner: Vec<OvershootSample>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(cleaned).unwrap_or_default());
}

fn fail(status: LevyqStatus, msg: &str) -> LevyqStatus {
    set_error(msg);
    status
}

fn guard<F: FnOnce() -> LevyqStatus>(f: F) -> LevyqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(LevyqStatus::InternalPanic, "internal panic"),
    }
}

fn sim_status(e: &SimError) -> LevyqStatus {
    match e {
        SimError::EventBudget { .. } => LevyqStatus::BudgetExhausted,
        _ => LevyqStatus::MathError,
    }
}

/// Copy the last error message for this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes (or be null with len 0).
#[no_mangle]
pub unsafe extern "C" fn levyq_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            // Always terminate.
            *buf.add(n - 1) = 0;
        }
        bytes.len().saturating_sub(1)
    })
}

/// Parse and validate a model from its JSON spec.
///
/// # Safety
/// `json` must be a NUL-terminated UTF-8 string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn levyq_model_from_json(
    json: *const c_char,
    out: *mut *mut LevyqModel,
) -> LevyqStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(LevyqStatus::InvalidArgument, "null pointer");
        }
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => return fail(LevyqStatus::ParseError, "model json is not utf-8"),
        };
        let parsed: Result<LevyModel, _> = serde_json::from_str(text);
        match parsed {
            Ok(m) => match m.validated() {
                Ok(m) => {
                    *out = Box::into_raw(Box::new(LevyqModel { inner: m }));
                    LevyqStatus::Ok
                }
                Err(e) => fail(LevyqStatus::ModelError, &e.to_string()),
            },
            Err(e) => fail(LevyqStatus::ParseError, &e.to_string()),
        }
    })
}

/// Build the classical M/M/1 net-input model (arrivals λ, Exp(μ) jobs).
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn levyq_model_mm1(
    lambda: f64,
    mu: f64,
    out: *mut *mut LevyqModel,
) -> LevyqStatus {
    guard(|| {
        if out.is_null() {
            return fail(LevyqStatus::InvalidArgument, "null pointer");
        }
        match LevyModel::mm1(lambda, mu).validated() {
            Ok(m) => {
                *out = Box::into_raw(Box::new(LevyqModel { inner: m }));
                LevyqStatus::Ok
            }
            Err(e) => fail(LevyqStatus::ModelError, &e.to_string()),
        }
    })
}

/// # Safety
/// `model` must come from a `levyq_model_*` constructor; double frees are UB.
#[no_mangle]
pub unsafe extern "C" fn levyq_model_free(model: *mut LevyqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Regime tag plus its parameter (γ for Cramér, E[X(1)] for positive drift,
/// 0 otherwise).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn levyq_model_regime(
    model: *const LevyqModel,
    tag: *mut LevyqRegime,
    param: *mut f64,
) -> LevyqStatus {
    guard(|| {
        if model.is_null() || tag.is_null() || param.is_null() {
            return fail(LevyqStatus::InvalidArgument, "null pointer");
        }
        match (*model).inner.classify_regime() {
            Regime::Cramer { gamma } => {
                *tag = LevyqRegime::Cramer;
                *param = gamma;
            }
            Regime::PositiveDrift { mean } => {
                *tag = LevyqRegime::PositiveDrift;
                *param = mean;
            }
            Regime::Neither => {
                *tag = LevyqRegime::Neither;
                *param = 0.0;
            }
        }
        LevyqStatus::Ok
    })
}

/// Build the limit-law evaluator for the model's regime.
///
/// # Safety
/// `model` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn levyq_limit_law_new(
    model: *const LevyqModel,
    out: *mut *mut LevyqLimitLaw,
) -> LevyqStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return fail(LevyqStatus::InvalidArgument, "null pointer");
        }
        match limitlaw::joint_law(&(*model).inner) {
            Ok(law) => {
                *out = Box::into_raw(Box::new(LevyqLimitLaw { inner: law }));
                LevyqStatus::Ok
            }
            Err(e) => fail(LevyqStatus::MathError, &e.to_string()),
        }
    })
}

/// # Safety
/// `law` must come from `levyq_limit_law_new`; double frees are UB.
#[no_mangle]
pub unsafe extern "C" fn levyq_limit_law_free(law: *mut LevyqLimitLaw) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

/// Evaluate the joint limiting CCDF `P(undershoot > u, overshoot > v)`.
///
/// # Safety
/// `law` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn levyq_limit_law_ccdf(
    law: *const LevyqLimitLaw,
    u: f64,
    v: f64,
    out: *mut f64,
) -> LevyqStatus {
    guard(|| {
        if law.is_null() || out.is_null() {
            return fail(LevyqStatus::InvalidArgument, "null pointer");
        }
        *out = (*law).inner.ccdf(u, v);
        LevyqStatus::Ok
    })
}

/// Joint density along the queue formula, when the job law has one.
///
/// # Safety
/// `model` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn levyq_queue_density(
    model: *const LevyqModel,
    u: f64,
    v: f64,
    out: *mut f64,
) -> LevyqStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return fail(LevyqStatus::InvalidArgument, "null pointer");
        }
        match limitlaw::queue_joint_density(&(*model).inner, u, v) {
            Ok(d) => {
                *out = d;
                LevyqStatus::Ok
            }
            Err(e) => fail(LevyqStatus::MathError, &e.to_string()),
        }
    })
}

/// Plain Monte Carlo overflow records of the reflected workload.
///
/// # Safety
/// `model` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn levyq_sample_overflow(
    model: *const LevyqModel,
    x: f64,
    n: u64,
    seed: u64,
    out: *mut *mut LevyqSamples,
) -> LevyqStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return fail(LevyqStatus::InvalidArgument, "null pointer");
        }
        match simulate::sample_overflow(&(*model).inner, x, n, seed) {
            Ok(samples) => {
                *out = Box::into_raw(Box::new(LevyqSamples { inner: samples }));
                LevyqStatus::Ok
            }
            Err(e) => fail(sim_status(&e), &e.to_string()),
        }
    })
}

/// Importance-sampled passage records under the Cramér tilt, weighted by
/// `e^{−γ·overshoot}`.
///
/// # Safety
/// `model` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn levyq_sample_tilted(
    model: *const LevyqModel,
    x: f64,
    n: u64,
    seed: u64,
    out: *mut *mut LevyqSamples,
) -> LevyqStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return fail(LevyqStatus::InvalidArgument, "null pointer");
        }
        match simulate::sample_first_passage_tilted(&(*model).inner, x, n, seed) {
            Ok(samples) => {
                *out = Box::into_raw(Box::new(LevyqSamples { inner: samples }));
                LevyqStatus::Ok
            }
            Err(e) => fail(sim_status(&e), &e.to_string()),
        }
    })
}

/// # Safety
/// `samples` must come from a sampler; double frees are UB.
#[no_mangle]
pub unsafe extern "C" fn levyq_samples_free(samples: *mut LevyqSamples) {
    if !samples.is_null() {
        drop(Box::from_raw(samples));
    }
}

/// Number of records in the batch.
///
/// # Safety
/// `samples` must be valid.
#[no_mangle]
pub unsafe extern "C" fn levyq_samples_len(samples: *const LevyqSamples) -> usize {
    if samples.is_null() {
        return 0;
    }
    (*samples).inner.len()
}

/// Copy up to `cap` records into `out`. Returns the number copied.
///
/// # Safety
/// `out` must point to at least `cap` writable `LevyqSample` slots.
#[no_mangle]
pub unsafe extern "C" fn levyq_samples_copy(
    samples: *const LevyqSamples,
    out: *mut LevyqSample,
    cap: usize,
) -> usize {
    if samples.is_null() || out.is_null() {
        return 0;
    }
    let src = &(*samples).inner;
    let n = src.len().min(cap);
    for (i, s) in src.iter().take(n).enumerate() {
        *out.add(i) = LevyqSample {
            undershoot: s.undershoot,
            overshoot: s.overshoot,
            passage_time: s.passage_time,
            weight: s.weight,
        };
    }
    n
}

/// Importance-sampled overflow probability `P(T(x) < ∞)` with its standard
/// error; Cramér regime only.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn levyq_ruin_estimate(
    model: *const LevyqModel,
    x: f64,
    n: u64,
    seed: u64,
    estimate: *mut f64,
    standard_error: *mut f64,
) -> LevyqStatus {
    guard(|| {
        if model.is_null() || estimate.is_null() || standard_error.is_null() {
            return fail(LevyqStatus::InvalidArgument, "null pointer");
        }
        match simulate::estimate_ruin_is(&(*model).inner, x, n, seed) {
            Ok((est, se)) => {
                *estimate = est;
                *standard_error = se;
                LevyqStatus::Ok
            }
            Err(e) => fail(sim_status(&e), &e.to_string()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    unsafe fn mm1(lambda: f64, mu: f64) -> *mut LevyqModel {
        let mut m: *mut LevyqModel = ptr::null_mut();
        assert_eq!(levyq_model_mm1(lambda, mu, &mut m), LevyqStatus::Ok);
        m
    }

    #[test]
    fn parse_classify_evaluate_free() {
        unsafe {
            let json = CString::new(
                r#"{"drift": -1.0, "up": {"rate": 1.0, "dist": {"kind": "exponential", "rate": 2.0}}, "down": null, "u0": 0.0}"#,
            )
            .unwrap();
            let mut m: *mut LevyqModel = ptr::null_mut();
            assert_eq!(levyq_model_from_json(json.as_ptr(), &mut m), LevyqStatus::Ok);

            let mut tag = LevyqRegime::Neither;
            let mut param = 0.0;
            assert_eq!(levyq_model_regime(m, &mut tag, &mut param), LevyqStatus::Ok);
            assert_eq!(tag, LevyqRegime::Cramer);
            assert!((param - 1.0).abs() < 1e-10);

            let mut law: *mut LevyqLimitLaw = ptr::null_mut();
            assert_eq!(levyq_limit_law_new(m, &mut law), LevyqStatus::Ok);
            let mut val = 0.0;
            assert_eq!(levyq_limit_law_ccdf(law, 1.0, 1.0, &mut val), LevyqStatus::Ok);
            assert!((val - 0.0812584978469937057).abs() < 1e-8);

            levyq_limit_law_free(law);
            levyq_model_free(m);
        }
    }

    #[test]
    fn parse_error_reports_message() {
        unsafe {
            let json = CString::new(r#"{"drift": -1.0, "unknown": 3}"#).unwrap();
            let mut m: *mut LevyqModel = ptr::null_mut();
            assert_eq!(
                levyq_model_from_json(json.as_ptr(), &mut m),
                LevyqStatus::ParseError
            );
            let mut buf = [0i8 as c_char; 256];
            let n = levyq_last_error(buf.as_mut_ptr(), buf.len());
            assert!(n > 0);
        }
    }

    #[test]
    fn sampling_and_copy() {
        unsafe {
            let m = mm1(2.0, 1.0);
            let mut s: *mut LevyqSamples = ptr::null_mut();
            assert_eq!(levyq_sample_overflow(m, 3.0, 100, 7, &mut s), LevyqStatus::Ok);
            assert_eq!(levyq_samples_len(s), 100);
            let mut rows = vec![
                LevyqSample { undershoot: 0.0, overshoot: 0.0, passage_time: 0.0, weight: 0.0 };
                100
            ];
            assert_eq!(levyq_samples_copy(s, rows.as_mut_ptr(), rows.len()), 100);
            assert!(rows.iter().all(|r| r.undershoot > 0.0 && r.overshoot > 0.0));
            levyq_samples_free(s);
            levyq_model_free(m);
        }
    }

    #[test]
    fn ruin_estimate_matches_closed_form() {
        unsafe {
            let m = mm1(1.0, 2.0);
            let (mut est, mut se) = (0.0, 0.0);
            assert_eq!(
                levyq_ruin_estimate(m, 4.0, 20_000, 11, &mut est, &mut se),
                LevyqStatus::Ok
            );
            let exact = 0.00915781944436709015;
            assert!((est - exact).abs() < 3.0 * se);
            levyq_model_free(m);
        }
    }

    #[test]
    fn regime_error_paths() {
        unsafe {
            let m = mm1(1.0, 1.0);
            let mut law: *mut LevyqLimitLaw = ptr::null_mut();
            assert_eq!(levyq_limit_law_new(m, &mut law), LevyqStatus::MathError);
            let mut s: *mut LevyqSamples = ptr::null_mut();
            assert_eq!(
                levyq_sample_tilted(m, 4.0, 10, 0, &mut s),
                LevyqStatus::MathError
            );
            levyq_model_free(m);
        }
    }
}
