//! C ABI for the qmarkov toolkit: opaque state handles, JSON strings for
//! structured data, and integer status codes. The header is generated by
//! cbindgen into `include/qmarkov.h`.
//!
//! Conventions:
//! - Strings returned through `char **` out-parameters are owned by the
//!   caller and must be released with [`qm_string_free`].
//! - On any non-`Ok` status, [`qm_last_error`] returns a message valid until
//!   the next qmarkov call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use qmarkov::cpmap::CPMapFamilyWire;
use qmarkov::markovize::{full_pipeline, ContractifyConfig};
use qmarkov::onplus;
use qmarkov::report::SuiteConfig;
use qmarkov::semigroup::{markov_semigroup_from_witnesses, SynthesisSchedule};
use qmarkov::state::{QuantumState, StandardForm, StateWire};
use qmarkov::suites;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmStatus {
    /// Success.
    Ok = 0,
    /// A pointer argument was null.
    NullPointer = 1,
    /// Malformed input (JSON, UTF-8 or parameter validation).
    InvalidInput = 2,
    /// The computation reported a failure (see qm_last_error).
    ComputationFailed = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let cstring =
        CString::new(message).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Message describing the most recent failure on this thread, or null. The
/// pointer stays valid until the next qmarkov call on the same thread; do
/// not free it.
#[no_mangle]
pub extern "C" fn qm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Release a string returned through a `char **` out-parameter.
///
/// # Safety
/// `s` must be a pointer previously returned by this library and not freed.
#[no_mangle]
pub unsafe extern "C" fn qm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, QmStatus> {
    if ptr.is_null() {
        set_error("null string argument".into());
        return Err(QmStatus::NullPointer);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|e| {
        set_error(format!("invalid UTF-8: {e}"));
        QmStatus::InvalidInput
    })
}

fn give_string(out: *mut *mut c_char, content: String) -> QmStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return QmStatus::NullPointer;
    }
    match CString::new(content) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            QmStatus::Ok
        }
        Err(e) => {
            set_error(format!("output contained an interior NUL byte: {e}"));
            QmStatus::ComputationFailed
        }
    }
}

/// Opaque handle to a standard-form state (a faithful density matrix with
/// its cached modular data).
pub struct QmState {
    inner: StandardForm,
}

/// Parse a state from its JSON form `{"dim": n, "rho": <matrix>}`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qm_state_parse(json: *const c_char, out: *mut *mut QmState) -> QmStatus {
    clear_error();
    if out.is_null() {
        set_error("null output pointer".into());
        return QmStatus::NullPointer;
    }
    let text = match unsafe { read_str(json) } {
        Ok(t) => t,
        Err(status) => return status,
    };
    let wire: StateWire = match serde_json::from_str(text) {
        Ok(w) => w,
        Err(e) => {
            set_error(format!("state JSON: {e}"));
            return QmStatus::InvalidInput;
        }
    };
    match QuantumState::from_wire(wire) {
        Ok(state) => {
            let handle = Box::new(QmState {
                inner: StandardForm::new(state),
            });
            unsafe { *out = Box::into_raw(handle) };
            QmStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            QmStatus::InvalidInput
        }
    }
}

/// Algebra dimension n of the state, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle from [`qm_state_parse`].
#[no_mangle]
pub unsafe extern "C" fn qm_state_dim(state: *const QmState) -> usize {
    if state.is_null() {
        return 0;
    }
    unsafe { &*state }.inner.dim()
}

/// Release a state handle.
///
/// # Safety
/// `state` must come from [`qm_state_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qm_state_free(state: *mut QmState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

fn parse_family(text: &str) -> Result<Vec<qmarkov::cpmap::CPMap>, QmStatus> {
    let family: CPMapFamilyWire = serde_json::from_str(text).map_err(|e| {
        set_error(format!("maps JSON: {e}"));
        QmStatus::InvalidInput
    })?;
    family.parse_maps().map_err(|e| {
        set_error(e.to_string());
        QmStatus::InvalidInput
    })
}

/// Run the markovization pipeline on a witness family given as
/// `{"maps": [<cp map>, ...]}`; writes the output maps and stage report as
/// JSON.
///
/// # Safety
/// `state` must be a live handle, `maps_json` a valid string pointer and
/// `out_json` a valid output slot.
#[no_mangle]
pub unsafe extern "C" fn qm_markovize(
    state: *const QmState,
    maps_json: *const c_char,
    eps_lo: u32,
    eps_hi: u32,
    out_json: *mut *mut c_char,
) -> QmStatus {
    clear_error();
    if state.is_null() {
        set_error("null state handle".into());
        return QmStatus::NullPointer;
    }
    let text = match unsafe { read_str(maps_json) } {
        Ok(t) => t,
        Err(status) => return status,
    };
    let maps = match parse_family(text) {
        Ok(m) => m,
        Err(status) => return status,
    };
    if eps_lo == 0 || eps_lo > eps_hi {
        set_error("need 1 <= eps_lo <= eps_hi".into());
        return QmStatus::InvalidInput;
    }
    let sf = &unsafe { &*state }.inner;
    let cfg = ContractifyConfig::dyadic(eps_lo, eps_hi);
    match full_pipeline(sf, &maps, &cfg) {
        Ok((outputs, report)) => {
            let payload = serde_json::json!({
                "maps": outputs.iter().map(|m| m.to_wire()).collect::<Vec<_>>(),
                "report": report,
            });
            give_string(out_json, payload.to_string())
        }
        Err(e) => {
            set_error(e.to_string());
            QmStatus::ComputationFailed
        }
    }
}

/// Synthesize the Markov semigroup of a KMS-symmetric witness family and
/// reconstruct snapshots at the given times; writes the spectral dump,
/// snapshots and synthesis report as JSON.
///
/// # Safety
/// Pointer arguments as in [`qm_markovize`]; `times` must point to
/// `times_len` doubles (may be null when `times_len` is 0).
#[no_mangle]
pub unsafe extern "C" fn qm_semigroup(
    state: *const QmState,
    maps_json: *const c_char,
    times: *const f64,
    times_len: usize,
    cone_levels: usize,
    out_json: *mut *mut c_char,
) -> QmStatus {
    clear_error();
    if state.is_null() {
        set_error("null state handle".into());
        return QmStatus::NullPointer;
    }
    let text = match unsafe { read_str(maps_json) } {
        Ok(t) => t,
        Err(status) => return status,
    };
    let maps = match parse_family(text) {
        Ok(m) => m,
        Err(status) => return status,
    };
    let times: &[f64] = if times_len == 0 {
        &[]
    } else {
        if times.is_null() {
            set_error("null times pointer with nonzero length".into());
            return QmStatus::NullPointer;
        }
        unsafe { std::slice::from_raw_parts(times, times_len) }
    };
    if times.iter().any(|&t| t <= 0.0 || t.is_nan()) {
        set_error("snapshot times must be positive".into());
        return QmStatus::InvalidInput;
    }
    let sf = &unsafe { &*state }.inner;
    match markov_semigroup_from_witnesses(
        sf,
        &maps,
        times,
        cone_levels.max(1),
        &SynthesisSchedule::default(),
    ) {
        Ok((semigroup, snapshots, report)) => {
            let payload = serde_json::json!({
                "semigroup": semigroup.to_wire(),
                "snapshots": snapshots.iter().map(|s| serde_json::json!({
                    "time": s.time,
                    "map": s.map.to_wire(),
                    "unital_defect": s.markov.unital_defect,
                    "state_preserving_defect": s.markov.state_preserving_defect,
                    "symmetry_defect": s.symmetry_defect,
                })).collect::<Vec<_>>(),
                "report": report,
            });
            give_string(out_json, payload.to_string())
        }
        Err(e) => {
            set_error(e.to_string());
            QmStatus::ComputationFailed
        }
    }
}

/// Run the verification suites. `samples` of 0 and a non-finite or
/// non-positive `tol` mean "per-check defaults"; `dims`/`dims_len` select
/// the random-instance dimensions (null/0 for the default {2,3,4}).
/// `all_passed` (optional) reports the overall verdict; the JSON report is
/// always written on `Ok`.
///
/// # Safety
/// `dims` must point to `dims_len` entries when non-null; `out_json` must be
/// a valid output slot.
#[no_mangle]
pub unsafe extern "C" fn qm_verify(
    seed: u64,
    samples: usize,
    tol: f64,
    dims: *const usize,
    dims_len: usize,
    all_passed: *mut bool,
    out_json: *mut *mut c_char,
) -> QmStatus {
    clear_error();
    let dims_vec = if dims.is_null() || dims_len == 0 {
        vec![2, 3, 4]
    } else {
        unsafe { std::slice::from_raw_parts(dims, dims_len) }.to_vec()
    };
    if dims_vec.iter().any(|&d| d == 0 || d > 6) {
        set_error("dims must be within 1..=6".into());
        return QmStatus::InvalidInput;
    }
    let cfg = SuiteConfig {
        seed,
        samples: if samples == 0 { None } else { Some(samples) },
        tolerance: if tol.is_finite() && tol >= 0.0 {
            Some(tol)
        } else {
            None
        },
        dims: dims_vec,
    };
    match suites::run_all(&cfg) {
        Ok(report) => {
            if !all_passed.is_null() {
                unsafe { *all_passed = report.all_passed() };
            }
            give_string(out_json, report.to_json())
        }
        Err(e) => {
            set_error(e.to_string());
            QmStatus::ComputationFailed
        }
    }
}

/// Spectral CSV `s,n_s,lambda_exact,lambda_float,d_s` of the free orthogonal
/// quantum group model for N ≥ 2.
///
/// # Safety
/// `out_csv` must be a valid output slot.
#[no_mangle]
pub unsafe extern "C" fn qm_onplus_csv(
    n: u64,
    s_max: usize,
    out_csv: *mut *mut c_char,
) -> QmStatus {
    clear_error();
    if n < 2 {
        set_error(format!("N must be at least 2, got {n}"));
        return QmStatus::InvalidInput;
    }
    match onplus::spectral_csv(n, s_max) {
        Ok(csv) => give_string(out_csv, csv),
        Err(e) => {
            set_error(e.to_string());
            QmStatus::ComputationFailed
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cstring(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    fn qubit_json() -> CString {
        cstring(
            r#"{"dim":2,"rho":{"rows":2,"cols":2,"data":[[0.75,0.0],[0.0,0.0],[0.0,0.0],[0.25,0.0]]}}"#,
        )
    }

    fn identity_family_json(count: usize) -> CString {
        let identity = serde_json::json!({
            "dim": 2,
            "kraus": [{"rows": 2, "cols": 2,
                       "data": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]}]
        });
        let maps: Vec<_> = (0..count).map(|_| identity.clone()).collect();
        cstring(&serde_json::json!({ "maps": maps }).to_string())
    }

    unsafe fn take_string(ptr: *mut c_char) -> String {
        let s = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_owned();
        unsafe { qm_string_free(ptr) };
        s
    }

    #[test]
    fn state_handle_round_trip() {
        unsafe {
            let mut handle: *mut QmState = ptr::null_mut();
            let status = qm_state_parse(qubit_json().as_ptr(), &mut handle);
            assert_eq!(status, QmStatus::Ok);
            assert_eq!(qm_state_dim(handle), 2);
            qm_state_free(handle);
        }
    }

    #[test]
    fn parse_rejects_malformed_state() {
        unsafe {
            let mut handle: *mut QmState = ptr::null_mut();
            let status = qm_state_parse(cstring("{not json").as_ptr(), &mut handle);
            assert_eq!(status, QmStatus::InvalidInput);
            assert!(!qm_last_error().is_null());
            // unfaithful state is rejected with a message
            let degenerate = cstring(
                r#"{"dim":2,"rho":{"rows":2,"cols":2,"data":[[1.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]}}"#,
            );
            let status = qm_state_parse(degenerate.as_ptr(), &mut handle);
            assert_eq!(status, QmStatus::InvalidInput);
            let msg = CStr::from_ptr(qm_last_error()).to_str().unwrap();
            assert!(msg.contains("faithfulness"), "message: {msg}");
        }
    }

    #[test]
    fn markovize_identity_family_through_ffi() {
        unsafe {
            let mut handle: *mut QmState = ptr::null_mut();
            assert_eq!(
                qm_state_parse(qubit_json().as_ptr(), &mut handle),
                QmStatus::Ok
            );
            let mut out: *mut c_char = ptr::null_mut();
            let status = qm_markovize(handle, identity_family_json(8).as_ptr(), 3, 3, &mut out);
            assert_eq!(status, QmStatus::Ok);
            let payload: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
            assert_eq!(payload["maps"].as_array().unwrap().len(), 1);
            qm_state_free(handle);
        }
    }

    #[test]
    fn semigroup_through_ffi() {
        unsafe {
            let mut handle: *mut QmState = ptr::null_mut();
            assert_eq!(
                qm_state_parse(qubit_json().as_ptr(), &mut handle),
                QmStatus::Ok
            );
            let mut out: *mut c_char = ptr::null_mut();
            let times = [0.5f64];
            let status = qm_semigroup(
                handle,
                identity_family_json(3).as_ptr(),
                times.as_ptr(),
                times.len(),
                2,
                &mut out,
            );
            assert_eq!(status, QmStatus::Ok);
            let payload: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
            assert_eq!(payload["semigroup"]["dim"], 4);
            assert_eq!(payload["snapshots"].as_array().unwrap().len(), 1);
            qm_state_free(handle);
        }
    }

    #[test]
    fn onplus_csv_through_ffi() {
        unsafe {
            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(qm_onplus_csv(2, 4, &mut out), QmStatus::Ok);
            let csv = take_string(out);
            assert!(csv.starts_with("s,n_s,lambda_exact"));
            assert!(csv.contains("1,2,1/2,"));
            assert_eq!(qm_onplus_csv(1, 4, &mut out), QmStatus::InvalidInput);
        }
    }

    #[test]
    fn verify_small_run_through_ffi() {
        unsafe {
            let dims = [2usize];
            let mut passed = false;
            let mut out: *mut c_char = ptr::null_mut();
            let status = qm_verify(42, 4, f64::NAN, dims.as_ptr(), 1, &mut passed, &mut out);
            assert_eq!(status, QmStatus::Ok);
            assert!(passed);
            let report: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
            assert_eq!(report["seed"], 42);
        }
    }
}
