//! The induced map as a countable-state Markov chain under Lebesgue measure.
//!
//! Row i of the transition matrix spreads mass geometrically over the states
//! above Q(i); drift and tail statistics of this walk decide between a
//! finite acim, an infinite sigma-finite one, and a wild attractor.

use crate::error::{Error, Result};
use crate::kneading::KneadingData;
use crate::plmap::PLMap;
use serde::{Deserialize, Serialize};

/// Attractor regime of the family at a given parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Finite absolutely continuous invariant probability measure.
    Acip,
    /// Conservative but infinite sigma-finite acim.
    SigmaFiniteInfinite,
    /// Wild Cantor attractor; Lebesgue-dissipative.
    WildAttractor,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Acip => write!(f, "acip"),
            Regime::SigmaFiniteInfinite => write!(f, "sigma-finite-infinite"),
            Regime::WildAttractor => write!(f, "wild-attractor"),
        }
    }
}

/// Truncated row-stochastic transition matrix of the induced walk.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    /// rows[i-1][j-1] = P(state i -> state j), states 1..=n.
    rows: Vec<Vec<f64>>,
    /// Mass cut off by the truncation, per row, before renormalisation.
    deficits: Vec<f64>,
    n: usize,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i - 1][j - 1]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i - 1]
    }

    pub fn deficit(&self, i: usize) -> f64 {
        self.deficits[i - 1]
    }

    pub fn max_deficit(&self) -> f64 {
        self.deficits.iter().cloned().fold(0.0, f64::max)
    }
}

/// Fibonacci-case matrix: A_{i,j} = (1-lambda) lambda^{j-(Q(i)+1)} for
/// j > Q(i), rows renormalised over the truncated tail.
pub fn transition_matrix(
    lambda: f64,
    kneading: &KneadingData,
    n: usize,
) -> Result<TransitionMatrix> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            range: "(0, 1)",
        });
    }
    if kneading.depth() < n {
        return Err(Error::IndexOutOfRange {
            index: n,
            depth: kneading.depth(),
        });
    }
    let mut rows = Vec::with_capacity(n);
    let mut deficits = Vec::with_capacity(n);
    for i in 1..=n {
        let q = kneading.q(i);
        let mut row = vec![0.0; n];
        let mut sum = 0.0;
        for (j, slot) in row.iter_mut().enumerate().take(n).skip(q) {
            let _ = j;
            *slot = (1.0 - lambda) * lambda.powi((j - q) as i32);
            sum += *slot;
        }
        let deficit = 1.0 - sum;
        deficits.push(deficit);
        for v in row.iter_mut() {
            *v /= sum;
        }
        rows.push(row);
    }
    Ok(TransitionMatrix { rows, deficits, n })
}

/// General-kneading matrix built from the interval lengths of a map:
/// A_{i,j} = eps_j / sum_{k > Q(i)} eps_k.
pub fn transition_matrix_from_map(map: &PLMap, n: usize) -> Result<TransitionMatrix> {
    if n > map.depth() {
        return Err(Error::IndexOutOfRange {
            index: n,
            depth: map.depth(),
        });
    }
    let kneading = map.kneading();
    let mut rows = Vec::with_capacity(n);
    let mut deficits = Vec::with_capacity(n);
    for i in 1..=n {
        let q = kneading.q(i);
        let tail = map.tail_above(q);
        let mut row = vec![0.0; n];
        let mut sum = 0.0;
        for j in q + 1..=n {
            row[j - 1] = map.eps(j) / tail;
            sum += row[j - 1];
        }
        deficits.push(1.0 - sum);
        for v in row.iter_mut() {
            *v /= sum;
        }
        rows.push(row);
    }
    Ok(TransitionMatrix { rows, deficits, n })
}

/// Stationary probability vector by power iteration, started uniformly on
/// the first ten states, converging in l1.
///
/// For lambda < 1/2 this reproduces the closed-form vector of the infinite
/// chain. For lambda >= 1/2 the infinite chain has no stationary probability
/// vector; what the iteration returns then is the truncated chain's own
/// stationary vector, with its mass piled up against the truncation edge.
pub fn stationary_vector(matrix: &TransitionMatrix, tol: f64) -> Result<Vec<f64>> {
    let n = matrix.n();
    let start = 10.min(n);
    let mut v = vec![0.0; n];
    for slot in v.iter_mut().take(start) {
        *slot = 1.0 / start as f64;
    }
    let max_iter = 200_000;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let mut next = vec![0.0; n];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            let row = matrix.row(i + 1);
            for (slot, a) in next.iter_mut().zip(row) {
                *slot += vi * a;
            }
        }
        let norm: f64 = next.iter().sum();
        for x in next.iter_mut() {
            *x /= norm;
        }
        residual = v.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum::<f64>();
        v = next;
        if residual < tol {
            return Ok(v);
        }
    }
    Err(Error::NoConvergence {
        what: "stationary vector power iteration",
        iterations: max_iter,
        residual,
    })
}

/// Closed-form stationary vector v_i = ((1-2 lambda)/lambda)(lambda/(1-lambda))^i
/// of the Fibonacci walk, valid for lambda < 1/2.
pub fn stationary_closed_form(lambda: f64, n: usize) -> Vec<f64> {
    let q = lambda / (1.0 - lambda);
    let c = (1.0 - 2.0 * lambda) / lambda;
    (1..=n).map(|i| c * q.powi(i as i32)).collect()
}

/// Expected state increment per step (rows k >= 2).
pub fn drift(lambda: f64) -> f64 {
    (2.0 * lambda - 1.0) / (1.0 - lambda)
}

/// Second moment of the state increment (rows k >= 2).
pub fn second_moment(lambda: f64) -> f64 {
    let r = lambda / (1.0 - lambda);
    r * r - 2.0 * r + 1.0
}

/// Asymptotic mean and second moment of the log-state increment for the
/// floor(rk) family with polynomial lengths of exponent alpha.
pub fn log_drift(r: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            range: "(0, 1)",
        });
    }
    if !(alpha > 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            range: "(1, inf)",
        });
    }
    let a = alpha - 1.0;
    let mean = 1.0 / a + r.ln();
    let second = r.ln() * r.ln() + 2.0 / a * r.ln() + 2.0 / (a * a);
    Ok((mean, second))
}

/// Partial sums of sum_k S_{k-1} v_k together with the asymptotic term
/// ratio gamma_+ * lambda/(1-lambda); the sum is finite iff the ratio < 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailExpectation {
    pub partial_sums: Vec<f64>,
    pub ratio: f64,
    pub finite: bool,
}

pub fn tail_expectation(
    lambda: f64,
    kneading: &KneadingData,
    v: &[f64],
    k_max: usize,
) -> TailExpectation {
    let gamma_plus = (1.0 + 5f64.sqrt()) / 2.0;
    let ratio = gamma_plus * lambda / (1.0 - lambda);
    let mut partial_sums = Vec::with_capacity(k_max);
    let mut acc = 0.0;
    for k in 1..=k_max.min(v.len()) {
        acc += kneading.tau_f64(k) * v[k - 1];
        partial_sums.push(acc);
    }
    TailExpectation {
        partial_sums,
        ratio,
        finite: ratio < 1.0,
    }
}

/// Attractor regime from the drift sign and the tail ratio (no hard-coded
/// parameter thresholds).
pub fn classify(lambda: f64) -> Result<Regime> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            range: "(0, 1)",
        });
    }
    let dr = drift(lambda);
    if dr > 0.0 {
        return Ok(Regime::WildAttractor);
    }
    let gamma_plus = (1.0 + 5f64.sqrt()) / 2.0;
    let ratio = gamma_plus * lambda / (1.0 - lambda);
    if ratio >= 1.0 {
        Ok(Regime::SigmaFiniteInfinite)
    } else {
        Ok(Regime::Acip)
    }
}

/// Bundle of walk statistics for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkModel {
    pub lambda: f64,
    pub drift: f64,
    pub second_moment: f64,
    pub tail_ratio: f64,
    pub regime: Regime,
}

impl WalkModel {
    pub fn new(lambda: f64) -> Result<WalkModel> {
        let gamma_plus = (1.0 + 5f64.sqrt()) / 2.0;
        Ok(WalkModel {
            lambda,
            drift: drift(lambda),
            second_moment: second_moment(lambda),
            tail_ratio: gamma_plus * lambda / (1.0 - lambda),
            regime: classify(lambda)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kneading::fibonacci_kneading;

    #[test]
    fn matrix_entries_fibonacci() {
        let kd = fibonacci_kneading(50);
        let a = transition_matrix(0.5, &kd, 50).unwrap();
        // row 3: entries 0, 1/2, 1/4, 1/8, ... (Q(3) = 1)
        assert_eq!(a.entry(3, 1), 0.0);
        assert!((a.entry(3, 2) - 0.5).abs() < 1e-12);
        assert!((a.entry(3, 3) - 0.25).abs() < 1e-12);
        assert!((a.entry(3, 4) - 0.125).abs() < 1e-12);
        let a3 = transition_matrix(0.3, &kd, 50).unwrap();
        assert!((a3.entry(1, 1) - 0.7).abs() < 1e-10);
    }

    #[test]
    fn rows_sum_to_one() {
        let kd = fibonacci_kneading(220);
        for lambda in [0.2, 0.5, 0.8] {
            let a = transition_matrix(lambda, &kd, 200).unwrap();
            for i in 1..=200 {
                let s: f64 = a.row(i).iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "lambda={lambda} i={i}");
            }
        }
    }

    #[test]
    fn general_matrix_matches_fibonacci_closed_form() {
        let map = PLMap::fibonacci_family(0.4, 120).unwrap();
        let a = transition_matrix(0.4, map.kneading(), 60).unwrap();
        let b = transition_matrix_from_map(&map, 60).unwrap();
        for i in 1..=60 {
            for j in 1..=60 {
                let (x, y) = (a.entry(i, j), b.entry(i, j));
                assert!((x - y).abs() < 1e-12, "i={i} j={j} a={x} b={y}");
            }
        }
    }

    #[test]
    fn power_iteration_matches_closed_form() {
        let kd = fibonacci_kneading(220);
        for lambda in [0.2, 0.3, 0.4] {
            let a = transition_matrix(lambda, &kd, 200).unwrap();
            let v = stationary_vector(&a, 1e-13).unwrap();
            let cf = stationary_closed_form(lambda, 200);
            let max_diff = v
                .iter()
                .zip(&cf)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(max_diff < 1e-10, "lambda={lambda} diff={max_diff:.2e}");
        }
    }

    #[test]
    fn transient_regime_mass_escapes_to_truncation_edge() {
        // above 1/2 the infinite chain is transient: whatever the truncated
        // matrix equilibrates to sits far out near the cut-off
        let kd = fibonacci_kneading(220);
        let a = transition_matrix(0.6, &kd, 200).unwrap();
        if let Ok(v) = stationary_vector(&a, 1e-12) {
            let center: f64 = v.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x).sum();
            assert!(center > 100.0, "mass center {center} should hug the edge");
        }
    }

    #[test]
    fn closed_form_sums_to_one() {
        let v = stationary_closed_form(0.4, 400);
        let s: f64 = v.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!((v[0] - 0.5 * (2.0 / 3.0)).abs() < 1e-12); // v_1 = 0.5*(2/3)^1
    }

    #[test]
    fn drift_and_moment_values() {
        assert_eq!(drift(0.5), 0.0);
        assert!((drift(0.6) - 0.5).abs() < 1e-14);
        assert!((second_moment(0.6) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn drift_matches_truncated_conditional_mean() {
        let kd = fibonacci_kneading(400);
        for lambda in [0.3, 0.5, 0.6] {
            let a = transition_matrix(lambda, &kd, 400).unwrap();
            for k in 2..=50usize {
                let mean: f64 = a
                    .row(k)
                    .iter()
                    .enumerate()
                    .map(|(j0, p)| ((j0 + 1) as f64 - k as f64) * p)
                    .sum();
                assert!(
                    (mean - drift(lambda)).abs() < 1e-10,
                    "lambda={lambda} k={k} mean={mean}"
                );
            }
        }
    }

    #[test]
    fn log_drift_values() {
        let (mean, second) = log_drift(0.8, 2.0).unwrap();
        assert!((mean - (1.0 + 0.8f64.ln())).abs() < 1e-14);
        let expect = 0.8f64.ln().powi(2) + 2.0 * 0.8f64.ln() + 2.0;
        assert!((second - expect).abs() < 1e-14);
        // zero-mean calibration r = e^{-1/(alpha-1)}
        let r0 = (-1.0f64).exp();
        let (m0, _) = log_drift(r0, 2.0).unwrap();
        assert!(m0.abs() < 1e-14);
    }

    #[test]
    fn tail_ratio_values() {
        let kd = fibonacci_kneading(60);
        let v = stationary_closed_form(0.3, 60);
        let te = tail_expectation(0.3, &kd, &v, 40);
        assert!((te.ratio - 0.6934).abs() < 1e-3);
        assert!(te.finite);
        let te45 = tail_expectation(0.45, &kd, &stationary_closed_form(0.45, 60), 40);
        assert!((te45.ratio - 1.3238).abs() < 1e-3);
        assert!(!te45.finite);
        let boundary = 2.0 / (3.0 + 5f64.sqrt());
        let teb = tail_expectation(boundary, &kd, &stationary_closed_form(boundary, 60), 40);
        assert!((teb.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classify_regimes() {
        assert_eq!(classify(0.6).unwrap(), Regime::WildAttractor);
        assert_eq!(classify(0.45).unwrap(), Regime::SigmaFiniteInfinite);
        assert_eq!(classify(0.3).unwrap(), Regime::Acip);
        assert_eq!(classify(0.5).unwrap(), Regime::SigmaFiniteInfinite);
    }

    #[test]
    fn classify_boundaries() {
        let l_star = 2.0 / (3.0 + 5f64.sqrt());
        assert_eq!(classify(l_star - 1e-6).unwrap(), Regime::Acip);
        assert_eq!(
            classify(l_star + 1e-6).unwrap(),
            Regime::SigmaFiniteInfinite
        );
        assert_eq!(classify(0.5 - 1e-6).unwrap(), Regime::SigmaFiniteInfinite);
        assert_eq!(classify(0.5 + 1e-6).unwrap(), Regime::WildAttractor);
    }
}
