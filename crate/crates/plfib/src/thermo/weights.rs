//! The conformal weight system and its closed forms at p = 0.
//!
//! The weights obey w_1 = (1-lambda)^t e^{-p S_0} and
//! w_j = [lambda(1-lambda)]^t e^{-p S_{j-1}} (1 - sum_{k<j-1} w_k). Direct
//! summation cancels catastrophically, so everything runs through the ratio
//! variable u_k = (w_{k+1}/w_k) e^{p S_{k-2}} and the damping factors
//! E_k = e^{-p S_k}, which satisfy the multiplicative Fibonacci recursion
//! E_k = E_{k-1} E_{k-2} (one exponential per evaluation, products after).

use super::ThermoConstants;
use crate::error::{Error, Result};
use crate::mpf::{Mpf, Precision, Real};
use serde::{Deserialize, Serialize};

/// Outcome of a weight-system evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightStatus {
    /// All weights positive and the total mass is 1 within tail tolerance.
    AllPositiveSumOne,
    /// The weight with this (1-based) index is the first non-positive one.
    WentNegative(usize),
    /// All weights positive but the total mass falls short of 1.
    SumBelowOne,
}

/// Conformal masses w_k of the branch pairs, with partial sums and status.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConformalSolution {
    pub lambda: f64,
    pub t: f64,
    pub p: f64,
    pub weights: Vec<f64>,
    /// Natural logs of the weights: finite along the positive prefix even
    /// where the f64 values underflow; NaN once a weight changes sign.
    pub log_weights: Vec<f64>,
    /// Partial sums H_j = sum_{k <= j} w_k.
    pub partial_sums: Vec<f64>,
    pub status: WeightStatus,
    /// H - 1 at the deepest computed index.
    pub residual: f64,
}

pub(crate) struct SystemEval {
    pub status: WeightStatus,
    pub h_minus_one: f64,
}

/// Iteration cap for one weight-system evaluation.
const N_CAP: usize = 400_000;

/// Evaluate the weight system at pressure shift p = e^{log_p} (log_p = -inf
/// means p = 0), optionally recording the first `collect_n` weights.
pub(crate) fn eval_system<R: Real>(
    lambda: f64,
    t: f64,
    log_p: f64,
    bits: u32,
    collect: Option<(&mut ConformalSolution, usize)>,
) -> Result<SystemEval> {
    let consts = ThermoConstants::new(lambda, t);
    let one = R::of(1.0, bits);
    let t_r = R::of(t, bits);
    let lam = R::of(lambda, bits);
    let lam_t = lam.ln().mul(&t_r).exp();
    // 1 - lambda formed in the backend, not as a rounded f64 difference.
    let lam1_t = one.sub(&lam).ln().mul(&t_r).exp();
    // e^{beta'}/4 = e^beta, built from beta' = (t - t2) log[lambda(1-lambda)]
    // so that the degenerate boundary t = t2 lands on 1/4 exactly and the
    // positivity certificate below stays decidable there.
    let quarter_xi = R::of(consts.beta_prime, bits)
        .exp()
        .div(&R::of(4.0, bits));
    let e_mp = if log_p == f64::NEG_INFINITY {
        one.clone()
    } else {
        R::of(0.0, bits).sub(&R::of(log_p, bits).exp()).exp()
    };

    // E_{k} = e^{-p S_k} with S_{-1} := 1: E_{-1} = E_0 = e^{-p}.
    let mut e_km2 = e_mp.clone();
    let mut e_km1 = e_mp.clone();
    let mut u = lam_t.clone();
    let mut w = lam1_t.mul(&e_mp);
    let mut h = w.clone();

    let (mut sink, collect_n) = match collect {
        Some((s, n)) => {
            s.weights.clear();
            s.log_weights.clear();
            s.partial_sums.clear();
            (Some(s), n)
        }
        None => (None, 0),
    };
    let mut log_w = lam1_t.to_f64().ln() + if log_p.is_finite() { -log_p.exp() } else { 0.0 };
    let mut log_e_km2 = if log_p.is_finite() { -log_p.exp() } else { 0.0 };
    let mut log_e_km1 = log_e_km2;
    if let Some(s) = sink.as_deref_mut() {
        s.weights.push(w.to_f64());
        s.log_weights.push(log_w);
        s.partial_sums.push(h.to_f64());
    }

    let tol_tail = R::of(1e-40, bits);
    let mut certified = false;
    let mut flushed = 0usize;
    let one_f = R::of(1.0, bits);
    let half = R::of(0.5, bits);
    let quarter = R::of(0.25, bits);
    let h_over = R::of(1.0 + 1e-9, bits);

    for k in 1..N_CAP {
        if u.is_sign_nonpositive() {
            // w_{k+1} = u_k w_k E_{k-2} first turns non-positive here
            return Ok(SystemEval {
                status: WeightStatus::WentNegative(k + 1),
                h_minus_one: h.sub(&one_f).to_f64(),
            });
        }
        let xi = quarter_xi.mul(&e_km1);
        if !certified && !u.lt(&half) && !quarter.lt(&xi) {
            // u >= 1/2 and xi <= 1/4: u stays >= 1/2 forever.
            certified = true;
        }
        // advance
        let w_next = u.mul(&w).mul(&e_km2);
        let log_w_next = log_w + u.to_f64().ln() + log_e_km2;
        h = h.add(&w_next);
        w = w_next;
        log_w = log_w_next;
        u = one.sub(&xi.div(&u));
        let e_new = e_km1.mul(&e_km2);
        let log_e_new = log_e_km1 + log_e_km2;
        e_km2 = e_km1;
        e_km1 = e_new;
        log_e_km2 = log_e_km1;
        log_e_km1 = log_e_new;

        if let Some(s) = sink.as_deref_mut() {
            if s.weights.len() < collect_n {
                s.weights.push(w.to_f64());
                s.log_weights.push(log_w);
                s.partial_sums.push(h.to_f64());
            }
        }

        if h_over.lt(&h) && !certified {
            // A partial sum above 1 forces a later negative weight.
            return Ok(SystemEval {
                status: WeightStatus::WentNegative(k + 2),
                h_minus_one: h.sub(&one_f).to_f64(),
            });
        }

        if certified {
            flushed += 1;
            let thresh = tol_tail.mul(&h);
            let done_collect = sink.as_deref().is_none_or(|s| s.weights.len() >= collect_n);
            if w.lt(&thresh) && done_collect {
                let h_minus_one = h.sub(&one_f).to_f64();
                let status = if h_minus_one < -1e-9 {
                    WeightStatus::SumBelowOne
                } else {
                    WeightStatus::AllPositiveSumOne
                };
                return Ok(SystemEval {
                    status,
                    h_minus_one,
                });
            }
            if flushed > 200_000 {
                break;
            }
        }
    }
    Err(Error::NoConvergence {
        what: "conformal weight recursion",
        iterations: N_CAP,
        residual: h.sub(&one_f).to_f64().abs(),
    })
}

/// Compute the conformal weights at a given shift p, classifying the outcome.
pub fn conformal_weights(
    lambda: f64,
    t: f64,
    p: f64,
    n: usize,
    precision: Precision,
) -> Result<ConformalSolution> {
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
    if !(p >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            range: "[0, inf)",
        });
    }
    let mut sol = ConformalSolution {
        lambda,
        t,
        p,
        weights: Vec::new(),
        log_weights: Vec::new(),
        partial_sums: Vec::new(),
        status: WeightStatus::SumBelowOne,
        residual: 0.0,
    };
    let log_p = if p == 0.0 { f64::NEG_INFINITY } else { p.ln() };
    let eval = match precision {
        Precision::F64 => eval_system::<f64>(lambda, t, log_p, 53, Some((&mut sol, n)))?,
        Precision::Bits(b) => eval_system::<Mpf>(lambda, t, log_p, b, Some((&mut sol, n)))?,
    };
    sol.status = eval.status;
    sol.residual = eval.h_minus_one;
    extend_by_difference_recursion(&mut sol, n);
    Ok(sol)
}

/// Fill requested weights past an early stop (negativity cuts the ratio
/// recursion short) using the plain difference form
/// w_{k+1} = e^{-p S_{k-2}} w_k - e^{beta - p S_k} w_{k-1}.
fn extend_by_difference_recursion(sol: &mut ConformalSolution, n: usize) {
    if sol.weights.len() >= n || sol.weights.len() < 2 {
        return;
    }
    let beta = (sol.lambda * (1.0 - sol.lambda)).ln() * sol.t;
    // S_k by Fibonacci recursion, aligned so s_km2 = S_{k-2} at k = current.
    let k0 = sol.weights.len(); // next index to fill is k0+1 (1-based)
    let mut s = vec![1.0f64, 1.0, 2.0]; // S_{-1}, S_0, S_1
    while s.len() < k0 + 2 {
        let m = s.len();
        s.push(s[m - 1] + s[m - 2]);
    }
    let mut h = *sol.partial_sums.last().unwrap();
    while sol.weights.len() < n {
        let k = sol.weights.len(); // currently have w_1..w_k, producing w_{k+1}
        while s.len() < k + 2 {
            let m = s.len();
            s.push(s[m - 1] + s[m - 2]);
        }
        let w_k = sol.weights[k - 1];
        let w_km1 = sol.weights[k - 2];
        let next = (-sol.p * s[k - 1]).exp() * w_k - (beta - sol.p * s[k + 1]).exp() * w_km1;
        h += next;
        sol.weights.push(next);
        sol.log_weights
            .push(if next > 0.0 { next.ln() } else { f64::NAN });
        sol.partial_sums.push(h);
    }
}

/// Root structure of the characteristic equation r^2 - r + e^beta = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootCase {
    RealDistinct,
    Degenerate,
    ComplexPair,
}

fn root_case(disc: f64) -> RootCase {
    if disc > 1e-13 {
        RootCase::RealDistinct
    } else if disc < -1e-13 {
        RootCase::ComplexPair
    } else {
        RootCase::Degenerate
    }
}

/// Closed-form solution of the weight recursion at p = 0.
///
/// Case selection by the sign of 1 - 4 e^beta: two real roots, the double
/// root 1/2, or a conjugate pair rho e^{±i phi} with rho = e^{beta/2} and
/// cos(phi) = 1/(2 rho). All three forms satisfy the exact recursion
/// w_{k+1} = w_k - e^beta w_{k-1} with w_1 = (1-lambda)^t, w_2 = lambda^t w_1.
pub fn closed_form_weights_p0(lambda: f64, t: f64, n: usize) -> (Vec<f64>, RootCase) {
    let eb = (lambda * (1.0 - lambda)).powf(t);
    let disc = 1.0 - 4.0 * eb;
    let lam_t = lambda.powf(t);
    let w1 = (1.0 - lambda).powf(t);
    let case = root_case(disc);
    let w = match case {
        RootCase::RealDistinct => {
            let sq = disc.sqrt();
            let rp = 0.5 * (1.0 + sq);
            let rm = 0.5 * (1.0 - sq);
            (1..=n)
                .map(|k| {
                    w1 / sq
                        * ((lam_t - rm) * rp.powi(k as i32 - 1)
                            + (rp - lam_t) * rm.powi(k as i32 - 1))
                })
                .collect()
        }
        RootCase::Degenerate => (1..=n)
            .map(|k| {
                w1 * 0.5f64.powi(k as i32)
                    * (4.0 * (1.0 - lam_t) + 2.0 * k as f64 * (2.0 * lam_t - 1.0))
            })
            .collect(),
        RootCase::ComplexPair => {
            let rho = eb.sqrt();
            let phi = (0.5 / rho).acos();
            let (x, y) = trig_coefficients(lambda, t);
            (1..=n)
                .map(|k| {
                    rho.powi(k as i32) * (x * (phi * k as f64).cos() + y * (phi * k as f64).sin())
                })
                .collect()
        }
    };
    (w, case)
}

/// Coefficients of the oscillatory closed form w_k = rho^k (X cos k phi +
/// Y sin k phi), fitted to the exact first two weights.
fn trig_coefficients(lambda: f64, t: f64) -> (f64, f64) {
    let eb = (lambda * (1.0 - lambda)).powf(t);
    let rho = eb.sqrt();
    let phi = (0.5 / rho).acos();
    let w1 = (1.0 - lambda).powf(t);
    let w2 = lambda.powf(t) * w1;
    let x = 2.0 * phi.cos() * w1 / rho - w2 / (rho * rho);
    let y = (w2 / (rho * rho) * phi.cos() - w1 / rho * (2.0 * phi).cos()) / phi.sin();
    (x, y)
}

/// Estimate of the first index with a negative p = 0 weight, for t < t1.
///
/// Real-root case: the exact crossing of the two geometric modes.
/// Degenerate / flat case: 2(1 - lambda^t)/(1 - 2 lambda^t).
/// Oscillatory case: the first sign change of the fitted sinusoid,
/// ceil((pi - psi)/phi) with the exact root angle phi and phase psi.
pub fn k0_estimate(lambda: f64, t: f64) -> Result<(usize, RootCase)> {
    let consts = ThermoConstants::new(lambda, t);
    if t >= consts.t1 {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            range: "t < t1",
        });
    }
    let eb = consts.beta.exp();
    let disc = 1.0 - 4.0 * eb;
    let lam_t = lambda.powf(t);
    let case = root_case(disc);
    let k0 = match case {
        RootCase::RealDistinct => {
            let sq = disc.sqrt();
            let rp = 0.5 * (1.0 + sq);
            let rm = 0.5 * (1.0 - sq);
            let arg = rp * (rp - lam_t) / (rm * (rm - lam_t));
            (arg.ln() / (rp / rm).ln()).ceil() as usize + 1
        }
        RootCase::Degenerate => (2.0 * (1.0 - lam_t) / (1.0 - 2.0 * lam_t)).ceil() as usize + 1,
        RootCase::ComplexPair => {
            let rho = eb.sqrt();
            let phi = (0.5 / rho).acos();
            let (x, y) = trig_coefficients(lambda, t);
            let psi = x.atan2(y);
            (((std::f64::consts::PI - psi) / phi).ceil() as usize).max(1)
        }
    };
    Ok((k0, case))
}

/// Report of the non-autonomous ratio recursion u_{k+1} = 1 - e^{beta' - p S_{k-1}}/(4 u_k).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UkReport {
    pub values: Vec<f64>,
    pub min_u: f64,
    pub min_index: usize,
    /// True when the sequence is certified to converge to 1.
    pub tends_to_one: bool,
}

/// Run the ratio recursion for K steps (u_1 = lambda^t).
pub fn uk_recursion(lambda: f64, t: f64, p: f64, k_max: usize) -> Result<UkReport> {
    let consts = ThermoConstants::new(lambda, t);
    let mut u = lambda.powf(t);
    let mut values = Vec::with_capacity(k_max.min(4096));
    values.push(u);
    let mut min_u = u;
    let mut min_index = 1;
    // log E_k = -p S_k, Fibonacci-additive; S_{-1} := 1.
    let mut log_e_km1 = -p; // E_0
    let mut log_e_km2 = -p; // E_{-1}
    let mut tends_to_one = false;
    for k in 1..k_max {
        if u.abs() < 1e-300 {
            return Err(Error::DivisionNearZero { index: k, value: u });
        }
        let xi = (consts.beta_prime + log_e_km1).exp() / 4.0;
        u = 1.0 - xi / u;
        if values.len() < 4096 {
            values.push(u);
        }
        if u < min_u {
            min_u = u;
            min_index = k + 1;
        }
        if u <= 0.0 {
            return Ok(UkReport {
                values,
                min_u,
                min_index,
                tends_to_one: false,
            });
        }
        if u >= 0.5 && xi <= 0.25 {
            tends_to_one = true;
        }
        let log_e_new = log_e_km1 + log_e_km2;
        log_e_km2 = log_e_km1;
        log_e_km1 = log_e_new;
    }
    Ok(UkReport {
        values,
        min_u,
        min_index,
        tends_to_one,
    })
}
