//! Pressure of the original system: the unique shift p with H(p, t) = 1 and
//! non-negative conformal weights.
//!
//! For p below the transition value some weight turns negative; above it the
//! total mass falls short of 1. The solver brackets that boundary in log p
//! (the structural factors of the transition asymptotics seed the bracket)
//! and bisects; near t1 the pressure is double-exponentially small in
//! 1/sqrt(t1 - t), hence the configurable mantissa.

use super::weights::{eval_system, WeightStatus};
use super::{t1_of, ThermoConstants, GAMMA_PLUS};
use crate::error::{Error, Result};
use crate::mpf::{Mpf, Precision};
use serde::{Deserialize, Serialize};

/// Configuration of the pressure solver.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub precision: Precision,
    /// Bisection steps after bracketing.
    pub max_bisect: usize,
    /// Stop when the log-p bracket is this tight.
    pub log_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            precision: Precision::Bits(113),
            max_bisect: 400,
            log_tol: 1e-13,
        }
    }
}

/// A solved point of the pressure function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PressurePoint {
    pub lambda: f64,
    pub t: f64,
    /// Pressure value (0 exactly for t >= t1; may underflow f64 near t1).
    pub p: f64,
    /// Natural log of p; -inf when p = 0.
    pub log_p: f64,
    /// |H(p, t) - 1| at the returned p.
    pub residual: f64,
    /// Final log-p bracket (equal endpoints when p = 0).
    pub bracket: (f64, f64),
}

fn is_low(lambda: f64, t: f64, log_p: f64, precision: Precision) -> Result<bool> {
    let eval = match precision {
        Precision::F64 => eval_system::<f64>(lambda, t, log_p, 53, None)?,
        Precision::Bits(b) => eval_system::<Mpf>(lambda, t, log_p, b, None)?,
    };
    Ok(matches!(eval.status, WeightStatus::WentNegative(_)))
}

fn residual_at(lambda: f64, t: f64, log_p: f64, precision: Precision) -> Result<f64> {
    let eval = match precision {
        Precision::F64 => eval_system::<f64>(lambda, t, log_p, 53, None)?,
        Precision::Bits(b) => eval_system::<Mpf>(lambda, t, log_p, b, None)?,
    };
    Ok(eval.h_minus_one.abs())
}

/// Smallest log p the given mantissa can still resolve against 1 - e^{-p}.
fn log_p_floor(precision: Precision) -> f64 {
    let bits = precision.bits() as f64;
    -(bits - 12.0) * std::f64::consts::LN_2
}

/// Solve for the pressure at (lambda, t).
///
/// Returns p = 0 for t >= t1 and the unique positive solution below; errors
/// with `PrecisionExhausted` when the transition is too close for the
/// configured mantissa.
pub fn solve_pressure(lambda: f64, t: f64, opts: &SolveOptions) -> Result<PressurePoint> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            range: "(0, 1)",
        });
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            range: "(0, inf)",
        });
    }
    let t1 = t1_of(lambda);
    if t >= t1 {
        let residual = residual_at(lambda, t, f64::NEG_INFINITY, opts.precision)?;
        return Ok(PressurePoint {
            lambda,
            t,
            p: 0.0,
            log_p: f64::NEG_INFINITY,
            residual,
            bracket: (f64::NEG_INFINITY, f64::NEG_INFINITY),
        });
    }

    // Seed the bracket from the structural transition factors, then widen
    // dyadically until the predicate flips on both sides.
    let bounds = pressure_bounds(lambda, t)?;
    let pad = 20.0 * std::f64::consts::LN_2;
    let sane = |v: f64, fallback: f64| {
        if v.is_finite() {
            v.clamp(-600.0, 4.0)
        } else {
            fallback
        }
    };
    let mut lo = sane(
        bounds.log_lower_factor.min(bounds.log_upper_factor) - pad,
        -80.0,
    );
    let mut hi = sane(
        bounds.log_lower_factor.max(bounds.log_upper_factor) + pad,
        0.0,
    );
    let floor = log_p_floor(opts.precision);

    let mut expanded = 0;
    while !is_low(lambda, t, lo, opts.precision)? {
        lo -= 64.0;
        expanded += 1;
        if lo < floor - 128.0 || expanded > 400 {
            // No negativity even at vanishing p: numerically indistinguishable
            // from the transition at this mantissa.
            return Err(Error::PrecisionExhausted {
                bits: opts.precision.bits(),
                what: "pressure lower bracket",
            });
        }
    }
    expanded = 0;
    while is_low(lambda, t, hi, opts.precision)? {
        hi += 16.0;
        expanded += 1;
        if hi > 16.0 || expanded > 400 {
            return Err(Error::BracketFailure {
                what: "pressure upper bracket",
            });
        }
    }

    for _ in 0..opts.max_bisect {
        if hi - lo < opts.log_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if is_low(lambda, t, mid, opts.precision)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    if hi < log_p_floor(opts.precision) {
        return Err(Error::PrecisionExhausted {
            bits: opts.precision.bits(),
            what: "pressure magnitude",
        });
    }

    let residual = residual_at(lambda, t, hi, opts.precision)?;
    Ok(PressurePoint {
        lambda,
        t,
        p: hi.exp(),
        log_p: hi,
        residual,
        bracket: (lo, hi),
    })
}

/// Structural factors bounding the pressure near the transition.
///
/// In the oscillatory regime (complex characteristic roots, i.e. t < t2 —
/// which for lambda >= 1/2 is the whole left neighbourhood of t1) the
/// factors are exp(-pi Gamma / sqrt(t2 - t)) and
/// exp(-(5/6) Gamma / sqrt(t2 - t)). For lambda < 1/2 and t2 < t < 1 they
/// are the powers (1-t)^{log gamma_+ / log R} and
/// (1-t)^{lambda log gamma_+ / (2t(1-2 lambda))} where
/// R = (1 + sqrt(1 - 4 lambda^t (1-lambda)^t))^2 / (4 lambda^t (1-lambda)^t).
/// The multiplicative constants in front are parameter-dependent and not
/// computed; the factors are meant for exponent fitting and bracket seeding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PressureBounds {
    pub log_lower_factor: f64,
    pub log_upper_factor: f64,
    /// The root ratio R, present on the lambda < 1/2, t > t2 branch.
    pub r_ratio: Option<f64>,
    pub capital_gamma: f64,
}

pub fn pressure_bounds(lambda: f64, t: f64) -> Result<PressureBounds> {
    let consts = ThermoConstants::new(lambda, t);
    if t >= consts.t1 {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            range: "t < t1",
        });
    }
    let gamma = consts.capital_gamma;
    let ll = lambda.powf(t) * (1.0 - lambda).powf(t);
    if 4.0 * ll >= 1.0 {
        // complex roots: sqrt(t2 - t) scaling (t2 = t1 when lambda >= 1/2)
        let dt = (consts.t2 - t).max(f64::MIN_POSITIVE);
        Ok(PressureBounds {
            log_lower_factor: -std::f64::consts::PI * gamma / dt.sqrt(),
            log_upper_factor: -(5.0 / 6.0) * gamma / dt.sqrt(),
            r_ratio: None,
            capital_gamma: gamma,
        })
    } else {
        let r = (1.0 + (1.0 - 4.0 * ll).sqrt()).powi(2) / (4.0 * ll);
        let log_one_minus_t = (1.0 - t).ln();
        Ok(PressureBounds {
            log_lower_factor: GAMMA_PLUS.ln() / r.ln() * log_one_minus_t,
            log_upper_factor: lambda * GAMMA_PLUS.ln() / (2.0 * t * (1.0 - 2.0 * lambda))
                * log_one_minus_t,
            r_ratio: Some(r),
            capital_gamma: gamma,
        })
    }
}

/// Finite-difference probe of the left derivative of the pressure at t1,
/// with the mean inducing time along the way.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivativeProbe {
    pub delta: f64,
    /// (p(t1) - p(t1 - delta)) / delta = -p(t1 - delta)/delta.
    pub slope_estimate: f64,
    /// Mean inducing time of the equilibrium state at t1 - delta.
    pub mean_inducing_time: f64,
}

pub fn left_derivative_probe(lambda: f64, deltas: &[f64]) -> Result<Vec<DerivativeProbe>> {
    let t1 = t1_of(lambda);
    let mut out = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let t = t1 - delta;
        if t <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
                range: "t1 - delta > 0",
            });
        }
        let point = solve_pressure(lambda, t, &SolveOptions::default())?;
        let eq = super::equilibrium::equilibrium_data(
            lambda,
            t,
            &super::equilibrium::EquilibriumOptions::default(),
        )?;
        out.push(DerivativeProbe {
            delta,
            slope_estimate: -point.p / delta,
            mean_inducing_time: eq.mean_inducing_time,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::t2_of;

    #[test]
    fn zero_at_and_above_transition() {
        for lambda in [0.3, 0.5, 0.6, 0.7] {
            let t1 = t1_of(lambda);
            for dt in [0.0, 0.05, 0.2] {
                let pt = solve_pressure(lambda, t1 + dt, &SolveOptions::default()).unwrap();
                assert_eq!(pt.p, 0.0);
                assert!(pt.residual < 1e-12, "residual {}", pt.residual);
            }
        }
    }

    #[test]
    fn frozen_value_lambda_03_t_09() {
        // Oracle: the f64 grid scan of H(p, t) performed before this module
        // was written; frozen to 12 digits.
        let pt = solve_pressure(0.3, 0.9, &SolveOptions::default()).unwrap();
        assert!((pt.p - 0.048515460947).abs() < 1e-9, "p = {:.12}", pt.p);
        assert!(pt.residual < 1e-12);
    }

    #[test]
    fn positive_and_decreasing_below_t1() {
        // pressure grows strictly as t moves down from the transition
        for lambda in [0.3, 0.6] {
            let t1 = t1_of(lambda);
            let mut last = 0.0;
            for i in 1..=6 {
                let t = t1 - 0.03 * i as f64;
                let pt = solve_pressure(lambda, t, &SolveOptions::default()).unwrap();
                assert!(pt.p > last, "lambda={lambda} t={t}");
                last = pt.p;
            }
        }
    }

    #[test]
    fn uniqueness_perturbation_breaks_solution() {
        // at p(1 - 1e-6) some weight goes negative; at p(1 + 1e-6) the mass
        // stays short of 1 by a visible amount
        let (lambda, t) = (0.45, 0.9);
        let pt = solve_pressure(lambda, t, &SolveOptions::default()).unwrap();
        let low = is_low(lambda, t, (pt.p * (1.0 - 1e-6)).ln(), Precision::Bits(113)).unwrap();
        assert!(low, "slightly smaller p must lose positivity");
        let eval = eval_system::<Mpf>(lambda, t, (pt.p * (1.0 + 1e-6)).ln(), 113, None).unwrap();
        assert!(matches!(
            eval.status,
            WeightStatus::SumBelowOne | WeightStatus::AllPositiveSumOne
        ));
        assert!(eval.h_minus_one < -1e-10, "H should dip below 1");
    }

    #[test]
    fn f64_precision_exhausts_near_transition() {
        let opts = SolveOptions {
            precision: Precision::F64,
            ..Default::default()
        };
        let err = solve_pressure(0.7, t1_of(0.7) - 1e-4, &opts).unwrap_err();
        assert!(matches!(err, Error::PrecisionExhausted { bits: 53, .. }));
    }

    #[test]
    fn extended_precision_reaches_deep_transition() {
        let opts = SolveOptions {
            precision: Precision::Bits(256),
            ..Default::default()
        };
        let pt = solve_pressure(0.7, t1_of(0.7) - 1e-4, &opts).unwrap();
        assert!(
            pt.log_p < -80.0 && pt.log_p > -260.0,
            "log p = {}",
            pt.log_p
        );
    }

    #[test]
    fn bounds_shapes() {
        // lambda = 1/2: Gamma = 2 log gamma_+ / sqrt(log 4)
        let b = pressure_bounds(0.5, 0.95).unwrap();
        let expect = 2.0 * GAMMA_PLUS.ln() / (4f64.ln()).sqrt();
        assert!((b.capital_gamma - expect).abs() < 1e-14);
        assert!(b.log_lower_factor < b.log_upper_factor);
        // log R ~ 2(1 - 2 lambda) near lambda = 1/2, t = 1
        let b2 = pressure_bounds(0.49, 1.0 - 1e-9).unwrap();
        let log_r = b2.r_ratio.unwrap().ln();
        assert!(
            (log_r - 2.0 * (1.0 - 2.0 * 0.49)).abs() < 2e-4,
            "log R = {log_r}"
        );
        // lambda = 0.7 close to t1: ordering of the factors
        let b3 = pressure_bounds(0.7, t1_of(0.7) - 1e-3).unwrap();
        assert!(b3.log_lower_factor < b3.log_upper_factor);
    }

    #[test]
    fn solver_rejects_nonpositive_t() {
        assert!(solve_pressure(0.5, 0.0, &SolveOptions::default()).is_err());
        assert!(solve_pressure(0.5, -1.0, &SolveOptions::default()).is_err());
    }

    #[test]
    fn left_derivative_probe_regimes() {
        let deltas = [0.04, 0.02, 0.01];
        // acip regime: slope estimates stay bounded away from zero
        let probes = left_derivative_probe(0.3, &deltas).unwrap();
        for p in &probes {
            assert!(
                p.slope_estimate < -0.1,
                "delta={} slope={}",
                p.delta,
                p.slope_estimate
            );
            assert!(p.mean_inducing_time.is_finite());
        }
        // wild regime: estimates collapse to zero
        let probes = left_derivative_probe(0.6, &deltas).unwrap();
        assert!(probes[0].slope_estimate.abs() < 0.05);
        assert!(probes[2].slope_estimate.abs() < probes[0].slope_estimate.abs());
        // second-type transition below 1/2: inducing time blows up
        let probes = left_derivative_probe(0.45, &deltas).unwrap();
        assert!(probes[2].mean_inducing_time > probes[0].mean_inducing_time);
    }

    #[test]
    fn monotone_through_root_case_change() {
        // lambda < 1/2: crossing t2 changes the closed-form root case; the
        // solved pressure stays strictly monotone through it.
        let lambda = 0.45;
        let t2 = t2_of(lambda);
        let ts = [t2 + 0.004, t2 + 0.001, t2, t2 - 0.001, t2 - 0.004];
        let mut last = 0.0;
        for t in ts {
            let pt = solve_pressure(lambda, t, &SolveOptions::default()).unwrap();
            assert!(pt.p > last, "t={t}");
            last = pt.p;
        }
    }
}
