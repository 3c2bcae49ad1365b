//! Recurrence classification of the shifted potential and the truncated
//! local partition-function diagnostic.

use super::t1_of;
use crate::error::{Error, Result};
use crate::kneading::fibonacci_kneading;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecurrenceClass {
    PositiveRecurrent,
    NullRecurrent,
    Transient,
}

impl std::fmt::Display for RecurrenceClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RecurrenceClass::PositiveRecurrent => write!(f, "positive-recurrent"),
            RecurrenceClass::NullRecurrent => write!(f, "null-recurrent"),
            RecurrenceClass::Transient => write!(f, "transient"),
        }
    }
}

/// Recurrence of the shifted potential for the induced and original systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub lambda: f64,
    pub t: f64,
    pub t1: f64,
    pub induced: RecurrenceClass,
    pub original: RecurrenceClass,
}

const T_EQ_TOL: f64 = 1e-12;

/// Classify recurrence at the conformal shift.
///
/// Induced system: recurrent iff t < t1 for lambda > 1/2 and iff t <= t1 = 1
/// for lambda <= 1/2; recurrence is positive except at lambda = 1/2, t = 1,
/// which is null recurrent. Original system: same thresholds, with
/// positive recurrence at t = t1 = 1 exactly when an acip exists
/// (lambda < 2/(3+sqrt 5)).
pub fn classify_recurrence(lambda: f64, t: f64) -> Result<RecurrenceReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            range: "(0, 1)",
        });
    }
    let t1 = t1_of(lambda);
    let at_t1 = (t - t1).abs() <= T_EQ_TOL;
    let below = t < t1 - T_EQ_TOL;
    let lambda_star = 2.0 / (3.0 + 5f64.sqrt());

    let induced = if lambda > 0.5 {
        if below {
            RecurrenceClass::PositiveRecurrent
        } else {
            RecurrenceClass::Transient
        }
    } else if (lambda - 0.5).abs() < f64::EPSILON {
        if below {
            RecurrenceClass::PositiveRecurrent
        } else if at_t1 {
            RecurrenceClass::NullRecurrent
        } else {
            RecurrenceClass::Transient
        }
    } else if below || at_t1 {
        RecurrenceClass::PositiveRecurrent
    } else {
        RecurrenceClass::Transient
    };

    let original = if lambda > 0.5 {
        if below {
            RecurrenceClass::PositiveRecurrent
        } else {
            RecurrenceClass::Transient
        }
    } else if below {
        RecurrenceClass::PositiveRecurrent
    } else if at_t1 {
        if lambda < lambda_star {
            RecurrenceClass::PositiveRecurrent
        } else {
            RecurrenceClass::NullRecurrent
        }
    } else {
        RecurrenceClass::Transient
    };

    Ok(RecurrenceReport {
        lambda,
        t,
        t1,
        induced,
        original,
    })
}

/// Local partition-function diagnostic on a truncated alphabet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GurevichReport {
    pub lambda: f64,
    pub t: f64,
    pub p: f64,
    pub n_states: usize,
    /// (n, (1/n) log Z_n) for n = 1..=n_max.
    pub rates: Vec<(usize, f64)>,
    /// log(Z_n / Z_{n-1}) for n = 2..=n_max: the growth estimator of the
    /// Gurevich pressure, free of the 1/n transient.
    pub growth_increments: Vec<f64>,
    /// Partial sums sum_{m<=n} Z_m (recurrence indicator: divergence at
    /// zero pressure means recurrence).
    pub partial_sums: Vec<f64>,
}

/// Compute `Z_n(Phi_t - p tau, [e_0])` for `e_0` = state 1 over the truncated
/// Markov graph: the weight of a state is exp(-t log s_i - p S_{i-1}) and
/// transitions i -> j are allowed for j > Q(i).
pub fn gurevich_diagnostic(
    lambda: f64,
    t: f64,
    p: f64,
    n_max: usize,
    n_states: usize,
) -> Result<GurevichReport> {
    if n_max > 20 || n_states > 2000 {
        return Err(Error::CombinatorialOverflow {
            n_max,
            states: n_states,
        });
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            range: "(0, 1)",
        });
    }
    let kd = fibonacci_kneading(n_states);
    let log_s1 = -(1.0 - lambda).ln();
    let log_sj = -(lambda * (1.0 - lambda)).ln();
    let state_weight: Vec<f64> = (1..=n_states)
        .map(|i| {
            let ls = if i == 1 { log_s1 } else { log_sj };
            (-t * ls - p * kd.tau_f64(i)).exp()
        })
        .collect();

    // v_n = e_1^T B^n; Z_n = v_n[state 1].
    let mut v = vec![0.0f64; n_states];
    v[0] = 1.0;
    let mut rates = Vec::with_capacity(n_max);
    let mut zs = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut next = vec![0.0f64; n_states];
        // B_{ij} = weight(i) for j > Q(i): accumulate suffix updates.
        // next[j] = sum_i v[i] weight(i) [j >= Q(i)+1, 1-based].
        let mut suffix = vec![0.0f64; n_states + 1];
        for i in 1..=n_states {
            if v[i - 1] == 0.0 {
                continue;
            }
            let q = kd.q(i);
            suffix[q] += v[i - 1] * state_weight[i - 1];
        }
        let mut acc = 0.0;
        for j in 0..n_states {
            acc += suffix[j];
            next[j] = acc;
        }
        v = next;
        let z = v[0];
        zs.push(z);
        rates.push((
            n,
            if z > 0.0 {
                z.ln() / n as f64
            } else {
                f64::NEG_INFINITY
            },
        ));
    }
    let growth_increments = zs.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let partial_sums = zs
        .iter()
        .scan(0.0, |acc, z| {
            *acc += z;
            Some(*acc)
        })
        .collect();
    Ok(GurevichReport {
        lambda,
        t,
        p,
        n_states,
        rates,
        growth_increments,
        partial_sums,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::{solve_pressure, SolveOptions};

    #[test]
    fn recurrence_table() {
        let t1 = t1_of(0.6);
        let r = classify_recurrence(0.6, t1 - 0.05).unwrap();
        assert_eq!(r.induced, RecurrenceClass::PositiveRecurrent);
        assert_eq!(r.original, RecurrenceClass::PositiveRecurrent);
        let r = classify_recurrence(0.6, t1 + 0.05).unwrap();
        assert_eq!(r.induced, RecurrenceClass::Transient);
        let r = classify_recurrence(0.5, 1.0).unwrap();
        assert_eq!(r.induced, RecurrenceClass::NullRecurrent);
        assert_eq!(r.original, RecurrenceClass::NullRecurrent);
        let r = classify_recurrence(0.3, 1.0).unwrap();
        assert_eq!(r.induced, RecurrenceClass::PositiveRecurrent);
        assert_eq!(r.original, RecurrenceClass::PositiveRecurrent);
        let r = classify_recurrence(0.45, 1.0).unwrap();
        assert_eq!(r.induced, RecurrenceClass::PositiveRecurrent);
        assert_eq!(r.original, RecurrenceClass::NullRecurrent);
        let r = classify_recurrence(0.45, 1.2).unwrap();
        assert_eq!(r.original, RecurrenceClass::Transient);
    }

    #[test]
    fn single_state_truncation_is_loop_weight_power() {
        let (lambda, t, p) = (0.5, 1.0, 0.0);
        let rep = gurevich_diagnostic(lambda, t, p, 6, 1).unwrap();
        // the only periodic orbit is the fixed loop at state 1
        let loop_weight = (1.0f64 - lambda).powf(t) * (-p * 1.0).exp();
        for (n, rate) in &rep.rates {
            assert!((rate - loop_weight.ln()).abs() < 1e-12, "n={n} rate={rate}");
        }
    }

    #[test]
    fn rates_approach_zero_at_solved_pressure() {
        let lambda = 0.6;
        let t = t1_of(lambda) - 0.05;
        let p = solve_pressure(lambda, t, &SolveOptions::default())
            .unwrap()
            .p;
        let rep = gurevich_diagnostic(lambda, t, p, 15, 60).unwrap();
        let window: Vec<f64> = rep.rates[4..].iter().map(|(_, r)| *r).collect();
        for pair in window.windows(2) {
            assert!(pair[1] > pair[0], "rates must increase towards 0");
        }
        assert!(*window.last().unwrap() < 0.0);
        // growth increments settle at the Gurevich pressure 0
        let last_inc = *rep.growth_increments.last().unwrap();
        assert!(last_inc.abs() < 0.05, "last increment {last_inc}");
    }

    #[test]
    fn shifted_potential_pushes_rate_negative() {
        let lambda = 0.6;
        let t = t1_of(lambda) - 0.05;
        let p = solve_pressure(lambda, t, &SolveOptions::default())
            .unwrap()
            .p;
        let rep0 = gurevich_diagnostic(lambda, t, p, 12, 60).unwrap();
        let rep1 = gurevich_diagnostic(lambda, t, p + 0.1, 12, 60).unwrap();
        let inc0 = *rep0.growth_increments.last().unwrap();
        let inc1 = *rep1.growth_increments.last().unwrap();
        // the shift costs at least 0.1 * min tau = 0.1 per step
        assert!(inc1 < inc0 - 0.09, "inc0={inc0} inc1={inc1}");
    }

    #[test]
    fn overflow_guard() {
        assert!(matches!(
            gurevich_diagnostic(0.5, 1.0, 0.0, 25, 60),
            Err(Error::CombinatorialOverflow { .. })
        ));
    }
}
