//! Thermodynamic formalism of the induced system: conformal weights,
//! pressure, closed-form measures, equilibrium data and recurrence.

mod equilibrium;
mod measures;
mod pressure;
mod recurrence;
mod weights;

pub use equilibrium::{
    equilibrium_data, pressure_identity_residual, EquilibriumData, EquilibriumOptions,
};
pub use measures::{
    closed_form_measures, hyperbolic_dimension, project_measures, Measures, Projection,
};
pub use pressure::{
    left_derivative_probe, pressure_bounds, solve_pressure, DerivativeProbe, PressureBounds,
    PressurePoint, SolveOptions,
};
pub use recurrence::{
    classify_recurrence, gurevich_diagnostic, GurevichReport, RecurrenceClass, RecurrenceReport,
};
pub use weights::{
    closed_form_weights_p0, conformal_weights, k0_estimate, uk_recursion, ConformalSolution,
    RootCase, UkReport, WeightStatus,
};

use serde::{Deserialize, Serialize};

/// Golden ratio (1 + sqrt 5)/2.
pub const GAMMA_PLUS: f64 = 1.618033988749895;

/// Derived constants of the potential family at (lambda, t).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThermoConstants {
    pub lambda: f64,
    pub t: f64,
    /// t log[lambda(1-lambda)].
    pub beta: f64,
    /// (t - t2) log[lambda(1-lambda)]; positive below t2.
    pub beta_prime: f64,
    /// Parameter with e^beta = 1/4: -log 4 / log[lambda(1-lambda)].
    pub t2: f64,
    /// Transition point of the pressure: 1 for lambda <= 1/2, else t2.
    pub t1: f64,
    pub gamma_plus: f64,
    /// 2 log(gamma_+) / sqrt(-log[lambda(1-lambda)]).
    pub capital_gamma: f64,
}

impl ThermoConstants {
    pub fn new(lambda: f64, t: f64) -> ThermoConstants {
        let log_ll = (lambda * (1.0 - lambda)).ln();
        let t2 = -(4f64.ln()) / log_ll;
        let t1 = if lambda <= 0.5 { 1.0 } else { t2 };
        ThermoConstants {
            lambda,
            t,
            beta: t * log_ll,
            beta_prime: (t - t2) * log_ll,
            t2,
            t1,
            gamma_plus: GAMMA_PLUS,
            capital_gamma: 2.0 * GAMMA_PLUS.ln() / (-log_ll).sqrt(),
        }
    }
}

/// t1 of the family: the smallest parameter with zero induced pressure.
pub fn t1_of(lambda: f64) -> f64 {
    ThermoConstants::new(lambda, 1.0).t1
}

/// t2 of the family: where [lambda(1-lambda)]^t = 1/4.
pub fn t2_of(lambda: f64) -> f64 {
    ThermoConstants::new(lambda, 1.0).t2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_at_t2_gives_quarter() {
        for lambda in [0.3, 0.5, 0.62, 0.9] {
            let c = ThermoConstants::new(lambda, t2_of(lambda));
            assert!((c.beta.exp() - 0.25).abs() < 1e-14, "lambda={lambda}");
        }
    }

    #[test]
    fn t1_is_min_of_one_and_t2() {
        assert_eq!(t1_of(0.3), 1.0);
        assert_eq!(t1_of(0.5), 1.0); // t2(1/2) = 1 exactly
        let c = ThermoConstants::new(0.7, 0.0);
        assert!(c.t1 < 1.0 && (c.t1 - c.t2).abs() == 0.0);
        assert!(t1_of(0.49999) <= 1.0);
    }

    #[test]
    fn capital_gamma_at_half() {
        let c = ThermoConstants::new(0.5, 1.0);
        let expect = 2.0 * GAMMA_PLUS.ln() / (4f64.ln()).sqrt();
        assert!((c.capital_gamma - expect).abs() < 1e-14);
    }
}
