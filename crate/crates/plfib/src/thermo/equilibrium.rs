//! Equilibrium data of the induced system at the solved pressure: the
//! stochastic matrix built from the conformal weights, its stationary
//! vector, entropy, Lyapunov integral and mean inducing time.

use super::pressure::{solve_pressure, SolveOptions};
use super::weights::{conformal_weights, WeightStatus};
use super::{measures, t1_of};
use crate::error::{Error, Result};
use crate::kneading::fibonacci_kneading;
use serde::{Deserialize, Serialize};

/// Options for the equilibrium computation.
#[derive(Debug, Clone, Copy)]
pub struct EquilibriumOptions {
    pub solve: SolveOptions,
    /// Maximum number of states kept in the truncated matrix.
    pub max_states: usize,
    /// l1 convergence tolerance of the power iteration.
    pub tol: f64,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions {
            solve: SolveOptions::default(),
            max_states: 600,
            tol: 1e-15,
        }
    }
}

/// Stationary data of the weight matrix at the solved pressure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumData {
    pub lambda: f64,
    pub t: f64,
    pub p: f64,
    /// Number of states in the truncation.
    pub n_states: usize,
    /// Conformal weights w_k, k = 1..=n_states.
    pub weights: Vec<f64>,
    /// Stationary vector of the weight matrix.
    pub stationary: Vec<f64>,
    /// Markov entropy (nats per induced step).
    pub entropy: f64,
    /// Analytic bound on the entropy missed by the truncation.
    pub entropy_tail_bound: f64,
    /// Lyapunov integral sum_i v_i log s_i (nats per induced step).
    pub lyapunov: f64,
    /// Mean inducing time Lambda = sum_i S_{i-1} v_i.
    pub mean_inducing_time: f64,
    /// Radon-Nikodym values h_k = v_k / w_k.
    pub densities: Vec<f64>,
    /// Projection normalising constant M.
    pub projection_constant: f64,
    /// Fraction of stationary mass on branches with left-side images.
    pub zeta: f64,
}

/// Row i of the weight matrix (1-based): rows 1 and 2 equal the weight
/// vector; row i >= 3 is the weight vector restricted to j >= i-1 and
/// renormalised by its tail sum.
fn row_range(i: usize) -> usize {
    i.saturating_sub(2)
}

/// Compute the equilibrium data at (lambda, t) for t < t1.
pub fn equilibrium_data(lambda: f64, t: f64, opts: &EquilibriumOptions) -> Result<EquilibriumData> {
    let t1 = t1_of(lambda);
    if t >= t1 {
        return Err(Error::InfiniteInducingTime { t, t1 });
    }
    let point = solve_pressure(lambda, t, &opts.solve)?;
    let sol = conformal_weights(lambda, t, point.p, opts.max_states, opts.solve.precision)?;
    if let WeightStatus::WentNegative(k) = sol.status {
        return Err(Error::NonPositiveWeight {
            index: k,
            value: *sol.weights.get(k - 1).unwrap_or(&f64::NAN),
        });
    }

    // Keep states down to weights ~ 1e-18: deeper rows carry no f64 mass.
    let mut n = sol
        .weights
        .iter()
        .position(|&w| w < 1e-18)
        .unwrap_or(sol.weights.len());
    n = n.clamp(8, opts.max_states);
    let w = &sol.weights[..n];
    let tails: Vec<f64> = {
        let mut acc = 0.0;
        let mut t_rev: Vec<f64> = w
            .iter()
            .rev()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        t_rev.reverse();
        t_rev
    };

    // Power iteration v <- v G from (1, 0, 0, ...), the constructive scheme.
    let mut v = vec![0.0; n];
    v[0] = 1.0;
    let max_iter = 100_000;
    let mut converged = false;
    for _ in 0..max_iter {
        let mut next = vec![0.0; n];
        let head = v[0] + v[1];
        for (slot, wk) in next.iter_mut().zip(w) {
            *slot = head * wk;
        }
        for i in 3..=n {
            let vi = v[i - 1];
            if vi == 0.0 {
                continue;
            }
            let lo = row_range(i);
            let tail = tails[lo];
            for j in lo..n {
                next[j] += vi * w[j] / tail;
            }
        }
        let norm: f64 = next.iter().sum();
        for x in next.iter_mut() {
            *x /= norm;
        }
        let diff: f64 = v.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        v = next;
        if diff < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "equilibrium power iteration",
            iterations: max_iter,
            residual: opts.tol,
        });
    }

    // Entropy: -sum_i v_i sum_j G_ij log G_ij, plus a bound for the rows and
    // columns lost to the truncation (the row tails are geometric-ish with
    // ratio below w_{k+1}/w_k <= ~0.66).
    let row_entropy = |lo: usize, tail: f64| -> f64 {
        let mut h = 0.0;
        for wj in &w[lo..n] {
            let g = wj / tail;
            if g > 0.0 {
                h -= g * g.ln();
            }
        }
        h
    };
    let mut entropy = (v[0] + v[1]) * row_entropy(0, tails[0]);
    for i in 3..=n {
        if v[i - 1] > 0.0 {
            let lo = row_range(i);
            entropy += v[i - 1] * row_entropy(lo, tails[lo]);
        }
    }
    // Truncated mass per row is below the last kept weight over the tail;
    // a tail of mass m with geometric ratio q <= 3/4 carries entropy at most
    // m (ln(1/m) + ln(1/(1-q)) + q/(1-q)).
    let m_tail = w[n - 1] / tails[0];
    let q = 0.75f64;
    let entropy_tail_bound = if m_tail > 0.0 {
        m_tail * ((1.0 / m_tail).ln() + (1.0 / (1.0 - q)).ln() + q / (1.0 - q))
    } else {
        0.0
    };

    let kd = fibonacci_kneading(n + 1);
    let log_s1 = -(1.0 - lambda).ln();
    let log_sj = -(lambda * (1.0 - lambda)).ln();
    let lyapunov: f64 = v
        .iter()
        .enumerate()
        .map(|(j0, vi)| vi * if j0 == 0 { log_s1 } else { log_sj })
        .sum();
    let mean_inducing_time: f64 = v
        .iter()
        .enumerate()
        .map(|(j0, vi)| vi * kd.tau_f64(j0 + 1))
        .sum();

    let densities: Vec<f64> = v
        .iter()
        .zip(w)
        .map(|(vi, wi)| if *wi > 0.0 { vi / wi } else { 0.0 })
        .collect();

    let projection_constant = measures::projection_constant(lambda, t, point.p, w)?;

    // Left-branch share of the stationary mass (Fibonacci side pattern).
    let zeta: f64 = v
        .iter()
        .enumerate()
        .filter(|(j0, _)| measures::fibonacci_side_is_left(j0 + 1))
        .map(|(_, vi)| vi)
        .sum();

    Ok(EquilibriumData {
        lambda,
        t,
        p: point.p,
        n_states: n,
        weights: w.to_vec(),
        stationary: v,
        entropy,
        entropy_tail_bound,
        lyapunov,
        mean_inducing_time,
        densities,
        projection_constant,
        zeta,
    })
}

/// h + sum_i v_i (-t log s_i - p S_{i-1}): zero at the equilibrium state.
pub fn pressure_identity_residual(lambda: f64, t: f64) -> Result<f64> {
    let eq = equilibrium_data(lambda, t, &EquilibriumOptions::default())?;
    Ok(eq.entropy - t * eq.lyapunov - eq.p * eq.mean_inducing_time)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_of_weight_matrix_sum_to_one() {
        let eq = equilibrium_data(0.3, 0.8, &EquilibriumOptions::default()).unwrap();
        let n = eq.n_states;
        let tails: Vec<f64> = (0..n)
            .map(|lo| eq.weights[lo..].iter().sum::<f64>())
            .collect();
        // row 1 and 2
        let s: f64 = eq.weights.iter().sum::<f64>() / tails[0];
        assert!((s - 1.0).abs() < 1e-12);
        for i in 3..=n {
            let lo = row_range(i);
            let s: f64 = eq.weights[lo..].iter().map(|w| w / tails[lo]).sum();
            assert!((s - 1.0).abs() < 1e-12, "row {i}");
        }
    }

    #[test]
    fn stationary_fixed_point() {
        let eq = equilibrium_data(0.45, 0.9, &EquilibriumOptions::default()).unwrap();
        let n = eq.n_states;
        let w = &eq.weights;
        let tails: Vec<f64> = (0..n).map(|lo| w[lo..].iter().sum::<f64>()).collect();
        let v = &eq.stationary;
        let mut next = vec![0.0; n];
        let head = v[0] + v[1];
        for j in 0..n {
            next[j] = head * w[j];
        }
        for i in 3..=n {
            let lo = row_range(i);
            for j in lo..n {
                next[j] += v[i - 1] * w[j] / tails[lo];
            }
        }
        let diff: f64 = v.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        assert!(diff < 1e-12, "vG - v = {diff:.2e}");
    }

    #[test]
    fn densities_increase_and_stay_bounded() {
        for (lambda, t) in [(0.3, 0.8), (0.45, 0.9)] {
            let eq = equilibrium_data(lambda, t, &EquilibriumOptions::default()).unwrap();
            let meaningful: Vec<f64> = eq
                .densities
                .iter()
                .zip(&eq.weights)
                .filter(|(_, w)| **w > 1e-14)
                .map(|(h, _)| *h)
                .collect();
            for pair in meaningful.windows(2) {
                assert!(pair[1] >= pair[0] - 1e-9, "h_k not increasing");
            }
            let ratio = meaningful.last().unwrap() / meaningful.first().unwrap();
            assert!(ratio.is_finite() && ratio < 1e3, "ratio {ratio}");
        }
    }

    #[test]
    fn equilibrium_identity_residual_small() {
        for (lambda, t) in [(0.3, 0.8), (0.45, 0.9)] {
            let r = pressure_identity_residual(lambda, t).unwrap();
            assert!(r.abs() < 1e-6, "lambda={lambda} t={t} r={r:.2e}");
        }
    }

    #[test]
    fn wrong_pressure_is_detected() {
        // negative control: with p/2 in place of p the identity fails visibly
        let (lambda, t) = (0.3, 0.8);
        let eq = equilibrium_data(lambda, t, &EquilibriumOptions::default()).unwrap();
        let wrong = eq.entropy - t * eq.lyapunov - (eq.p / 2.0) * eq.mean_inducing_time;
        assert!(wrong.abs() > 1e-3, "wrong-p residual {wrong}");
    }

    #[test]
    fn rejects_t_at_or_above_t1() {
        assert!(matches!(
            equilibrium_data(0.3, 1.0, &EquilibriumOptions::default()),
            Err(Error::InfiniteInducingTime { .. })
        ));
    }

    #[test]
    fn zeta_in_unit_interval() {
        let eq = equilibrium_data(0.45, 0.9, &EquilibriumOptions::default()).unwrap();
        assert!(eq.zeta > 0.0 && eq.zeta < 1.0);
    }
}
