//! C ABI for the plfib library.
//!
//! Maps are handed out as opaque pointers; every fallible call returns a
//! `PlfibStatus` and writes results through out-pointers. Pointers created
//! by `plfib_map_new` must be released with `plfib_map_free`.

use plfib::mc::{simulate_walk, WalkSimConfig};
use plfib::mpf::Precision;
use plfib::plmap::PLMap;
use plfib::thermo::{hyperbolic_dimension, solve_pressure, SolveOptions};
use plfib::walk::{classify, drift, Regime};
use plfib::Error;

/// Status codes of the C interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlfibStatus {
    Ok = 0,
    InvalidParameter = 1,
    DepthExceeded = 2,
    OutsideDomain = 3,
    BoundaryPoint = 4,
    NoConvergence = 5,
    PrecisionExhausted = 6,
    NullPointer = 7,
    OtherError = 8,
}

fn status_of(e: &Error) -> PlfibStatus {
    match e {
        Error::InvalidParameter { .. } | Error::IndexOutOfRange { .. } => {
            PlfibStatus::InvalidParameter
        }
        Error::DepthExceeded { .. } => PlfibStatus::DepthExceeded,
        Error::OutsideDomain { .. } => PlfibStatus::OutsideDomain,
        Error::BoundaryPoint { .. } => PlfibStatus::BoundaryPoint,
        Error::NoConvergence { .. } | Error::BracketFailure { .. } => PlfibStatus::NoConvergence,
        Error::PrecisionExhausted { .. } => PlfibStatus::PrecisionExhausted,
        _ => PlfibStatus::OtherError,
    }
}

/// Attractor regime codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlfibRegime {
    Acip = 0,
    SigmaFiniteInfinite = 1,
    WildAttractor = 2,
}

/// Opaque handle to a built map.
pub struct PlfibMap {
    inner: PLMap,
}

/// Build a Fibonacci-family map with the given parameter and branch depth.
/// On success writes a heap pointer to `out`; free it with `plfib_map_free`.
///
/// # Safety
/// `out` must be a valid pointer to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn plfib_map_new(
    lambda: f64,
    depth: usize,
    out: *mut *mut PlfibMap,
) -> PlfibStatus {
    if out.is_null() {
        return PlfibStatus::NullPointer;
    }
    match PLMap::fibonacci_family(lambda, depth) {
        Ok(inner) => {
            let boxed = Box::new(PlfibMap { inner });
            unsafe { *out = Box::into_raw(boxed) };
            PlfibStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Release a map handle. A null pointer is a no-op.
///
/// # Safety
/// `map` must be null or a pointer previously returned by `plfib_map_new`
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn plfib_map_free(map: *mut PlfibMap) {
    if !map.is_null() {
        drop(unsafe { Box::from_raw(map) });
    }
}

/// Evaluate the unimodal map f at x in [0, 1].
///
/// # Safety
/// `map` must be a live handle from `plfib_map_new`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plfib_map_eval_f(
    map: *const PlfibMap,
    x: f64,
    out: *mut f64,
) -> PlfibStatus {
    if map.is_null() || out.is_null() {
        return PlfibStatus::NullPointer;
    }
    match unsafe { &(*map).inner }.eval_f(x) {
        Ok(v) => {
            unsafe { *out = v };
            PlfibStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Evaluate the induced map F through its affine branch; also reports the
/// branch index.
///
/// # Safety
/// `map` must be a live handle; `out_value` and `out_branch` must be
/// writable (either may be null to skip that output).
#[no_mangle]
pub unsafe extern "C" fn plfib_map_eval_induced(
    map: *const PlfibMap,
    x: f64,
    out_value: *mut f64,
    out_branch: *mut usize,
) -> PlfibStatus {
    if map.is_null() {
        return PlfibStatus::NullPointer;
    }
    match unsafe { &(*map).inner }.eval_f_induced_linear(x) {
        Ok((v, info)) => {
            if !out_value.is_null() {
                unsafe { *out_value = v };
            }
            if !out_branch.is_null() {
                unsafe { *out_branch = info.index };
            }
            PlfibStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Critical order of the family at lambda.
#[no_mangle]
pub extern "C" fn plfib_critical_order(lambda: f64) -> f64 {
    plfib::plmap::critical_order(lambda)
}

/// Hyperbolic dimension of the family at lambda.
#[no_mangle]
pub extern "C" fn plfib_hyperbolic_dimension(lambda: f64) -> f64 {
    hyperbolic_dimension(lambda)
}

/// Drift of the induced random walk at lambda.
#[no_mangle]
pub extern "C" fn plfib_drift(lambda: f64) -> f64 {
    drift(lambda)
}

/// Classify the attractor regime at lambda.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plfib_classify(lambda: f64, out: *mut PlfibRegime) -> PlfibStatus {
    if out.is_null() {
        return PlfibStatus::NullPointer;
    }
    match classify(lambda) {
        Ok(r) => {
            unsafe {
                *out = match r {
                    Regime::Acip => PlfibRegime::Acip,
                    Regime::SigmaFiniteInfinite => PlfibRegime::SigmaFiniteInfinite,
                    Regime::WildAttractor => PlfibRegime::WildAttractor,
                }
            };
            PlfibStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Solve the pressure at (lambda, t) with the given mantissa width
/// (53, 113 or 256). Writes p and log(p) (log is -inf when p = 0).
///
/// # Safety
/// `out_p` and `out_log_p` must be writable (either may be null).
#[no_mangle]
pub unsafe extern "C" fn plfib_solve_pressure(
    lambda: f64,
    t: f64,
    precision_bits: u32,
    out_p: *mut f64,
    out_log_p: *mut f64,
) -> PlfibStatus {
    let opts = SolveOptions {
        precision: Precision::from_bits(precision_bits),
        ..Default::default()
    };
    match solve_pressure(lambda, t, &opts) {
        Ok(pt) => {
            if !out_p.is_null() {
                unsafe { *out_p = pt.p };
            }
            if !out_log_p.is_null() {
                unsafe { *out_log_p = pt.log_p };
            }
            PlfibStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Transition parameter t1 of the pressure function.
#[no_mangle]
pub extern "C" fn plfib_t1(lambda: f64) -> f64 {
    plfib::thermo::t1_of(lambda)
}

/// Run a walk simulation and report the escape fraction.
///
/// # Safety
/// `out_escape_fraction` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plfib_simulate_escape_fraction(
    lambda: f64,
    n_walkers: usize,
    n_steps: usize,
    seed: u64,
    threshold: usize,
    out_escape_fraction: *mut f64,
) -> PlfibStatus {
    if out_escape_fraction.is_null() {
        return PlfibStatus::NullPointer;
    }
    let cfg = WalkSimConfig::new(lambda, n_walkers, n_steps, seed, threshold);
    match simulate_walk(&cfg) {
        Ok(rep) => {
            unsafe { *out_escape_fraction = rep.escape_fraction };
            PlfibStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_lifecycle_and_eval() {
        let mut handle: *mut PlfibMap = std::ptr::null_mut();
        let st = unsafe { plfib_map_new(0.5, 80, &mut handle) };
        assert_eq!(st, PlfibStatus::Ok);
        assert!(!handle.is_null());
        let mut v = 0.0;
        let st = unsafe { plfib_map_eval_f(handle, 0.25, &mut v) };
        assert_eq!(st, PlfibStatus::Ok);
        assert!((v - 0.5).abs() < 1e-15);
        let mut branch = 0usize;
        let mut fv = 0.0;
        let x = 0.3; // inside the induced core for lambda = 1/2
        let st = unsafe { plfib_map_eval_induced(handle, x, &mut fv, &mut branch) };
        assert_eq!(st, PlfibStatus::Ok);
        assert!(branch >= 1);
        unsafe { plfib_map_free(handle) };
    }

    #[test]
    fn rejects_bad_lambda() {
        let mut handle: *mut PlfibMap = std::ptr::null_mut();
        let st = unsafe { plfib_map_new(1.5, 80, &mut handle) };
        assert_eq!(st, PlfibStatus::InvalidParameter);
    }

    #[test]
    fn classify_and_dimension() {
        let mut regime = PlfibRegime::Acip;
        assert_eq!(unsafe { plfib_classify(0.6, &mut regime) }, PlfibStatus::Ok);
        assert_eq!(regime, PlfibRegime::WildAttractor);
        assert!((plfib_hyperbolic_dimension(0.5) - 1.0).abs() < 1e-14);
        assert!((plfib_critical_order(0.5) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn pressure_through_ffi() {
        let mut p = -1.0;
        let mut lp = 0.0;
        let st = unsafe { plfib_solve_pressure(0.3, 0.9, 113, &mut p, &mut lp) };
        assert_eq!(st, PlfibStatus::Ok);
        assert!((p - 0.048515460947).abs() < 1e-9);
        let st = unsafe { plfib_solve_pressure(0.3, 1.2, 113, &mut p, &mut lp) };
        assert_eq!(st, PlfibStatus::Ok);
        assert_eq!(p, 0.0);
    }

    #[test]
    fn simulation_through_ffi() {
        let mut frac = 0.0;
        let st = unsafe { plfib_simulate_escape_fraction(0.6, 200, 2000, 7, 50, &mut frac) };
        assert_eq!(st, PlfibStatus::Ok);
        assert!(frac > 0.9);
    }
}
