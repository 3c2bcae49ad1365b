//! Monte Carlo verification of the induced random walk and deterministic
//! orbit sampling.
//!
//! Walkers draw their jumps from the per-row geometric law
//! j = Q(i) + 1 + Geom(1-lambda) by inverse CDF. Reproducibility: a ChaCha12
//! generator seeded from the master seed, one stream per walker, so reports
//! are bit-identical for a given (seed, parameters) regardless of thread
//! count (all aggregation is over integer counters).

use crate::error::{Error, Result};
use crate::plmap::PLMap;
use crate::walk::stationary_closed_form;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Parameters of a walk simulation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct WalkSimConfig {
    pub lambda: f64,
    pub n_walkers: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// Walkers whose final state is at or above this count as escaped.
    pub threshold: usize,
    /// Walkers crossing this state freeze and count as escaped.
    pub state_cap: usize,
}

impl WalkSimConfig {
    pub fn new(lambda: f64, n_walkers: usize, n_steps: usize, seed: u64, threshold: usize) -> Self {
        WalkSimConfig {
            lambda,
            n_walkers,
            n_steps,
            seed,
            threshold,
            state_cap: 10_000,
        }
    }
}

/// Aggregated outcome of a walk simulation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WalkRunReport {
    pub config: WalkSimConfig,
    /// Fraction of walkers with final state >= threshold (or frozen at cap).
    pub escape_fraction: f64,
    /// Time-occupation histogram over states 1..=hist_len, normalised.
    pub histogram: Vec<f64>,
    /// Mean observed increment from states >= 2.
    pub empirical_drift: f64,
    /// Standard error of the empirical drift.
    pub drift_std_error: f64,
    /// Total-variation distance between the occupation histogram and the
    /// closed-form stationary vector (only meaningful for lambda < 1/2).
    pub tv_to_closed_form: Option<f64>,
}

const HIST_LEN: usize = 512;

#[derive(Clone)]
struct Partial {
    occupation: Vec<u64>,
    escaped: u64,
    incr_sum: f64,
    incr_sq_sum: f64,
    incr_count: u64,
}

impl Partial {
    fn new() -> Partial {
        Partial {
            occupation: vec![0; HIST_LEN],
            escaped: 0,
            incr_sum: 0.0,
            incr_sq_sum: 0.0,
            incr_count: 0,
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        for (a, b) in self.occupation.iter_mut().zip(&other.occupation) {
            *a += b;
        }
        self.escaped += other.escaped;
        self.incr_sum += other.incr_sum;
        self.incr_sq_sum += other.incr_sq_sum;
        self.incr_count += other.incr_count;
        self
    }
}

#[inline]
fn geometric_jump(rng: &mut ChaCha12Rng, lambda: f64, q: usize) -> usize {
    // Geom(1-lambda) failures by inverse CDF; u in [0, 1)
    let u: f64 = rng.random();
    let g = ((1.0 - u).ln() / lambda.ln()).floor() as usize;
    q + 1 + g
}

fn run_walker(cfg: &WalkSimConfig, walker: u64) -> Partial {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(walker + 1);
    let mut part = Partial::new();
    let mut state = 1usize;
    let mut frozen = false;
    for _ in 0..cfg.n_steps {
        if !frozen {
            let q = state.saturating_sub(2);
            let next = geometric_jump(&mut rng, cfg.lambda, q);
            if state >= 2 {
                let inc = next as f64 - state as f64;
                part.incr_sum += inc;
                part.incr_sq_sum += inc * inc;
                part.incr_count += 1;
            }
            state = next;
            if state > cfg.state_cap {
                frozen = true;
            }
        }
        let slot = state.min(HIST_LEN) - 1;
        part.occupation[slot] += 1;
    }
    if frozen || state >= cfg.threshold {
        part.escaped = 1;
    }
    part
}

/// Simulate the induced walk.
pub fn simulate_walk(cfg: &WalkSimConfig) -> Result<WalkRunReport> {
    if !(cfg.lambda > 0.0 && cfg.lambda < 1.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: cfg.lambda,
            range: "(0, 1)",
        });
    }
    let total = (0..cfg.n_walkers as u64)
        .into_par_iter()
        .map(|w| run_walker(cfg, w))
        .reduce(Partial::new, Partial::merge);

    let steps_total: u64 = total.occupation.iter().sum();
    let histogram: Vec<f64> = total
        .occupation
        .iter()
        .map(|&c| c as f64 / steps_total as f64)
        .collect();
    let empirical_drift = total.incr_sum / total.incr_count.max(1) as f64;
    let var =
        total.incr_sq_sum / total.incr_count.max(1) as f64 - empirical_drift * empirical_drift;
    let drift_std_error = (var / total.incr_count.max(1) as f64).sqrt();
    let tv_to_closed_form = if cfg.lambda < 0.5 {
        let v = stationary_closed_form(cfg.lambda, HIST_LEN);
        let tv: f64 = histogram
            .iter()
            .zip(&v)
            .map(|(h, vi)| (h - vi).abs())
            .sum::<f64>()
            / 2.0;
        Some(tv)
    } else {
        None
    };
    Ok(WalkRunReport {
        config: *cfg,
        escape_fraction: total.escaped as f64 / cfg.n_walkers as f64,
        histogram,
        empirical_drift,
        drift_std_error,
        tv_to_closed_form,
    })
}

/// Outcome of iterating the induced map from one starting point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitReport {
    /// Branch index visited at each return.
    pub branches: Vec<u32>,
    /// Step at which the orbit entered the unresolved tail, if it did;
    /// escape towards the critical point is an outcome, not a failure.
    pub escaped_at: Option<usize>,
    /// `transition_counts[i][j]`: observed moves from branch i+1 to j+1,
    /// both capped at 64.
    pub transition_counts: Vec<Vec<u64>>,
}

const ORBIT_STATES: usize = 64;

/// Iterate the induced map `n_returns` times, recording branch indices.
pub fn simulate_orbit(map: &PLMap, x0: f64, n_returns: usize) -> Result<OrbitReport> {
    let mut branches = Vec::with_capacity(n_returns.min(1 << 20));
    let mut counts = vec![vec![0u64; ORBIT_STATES]; ORBIT_STATES];
    let mut escaped_at = None;
    let mut x = x0;
    let mut prev: Option<usize> = None;
    for step in 0..n_returns {
        match map.eval_f_induced_linear(x) {
            Ok((y, info)) => {
                if branches.len() < (1 << 20) {
                    branches.push(info.index as u32);
                }
                if let Some(p) = prev {
                    let a = p.min(ORBIT_STATES) - 1;
                    let b = info.index.min(ORBIT_STATES) - 1;
                    counts[a][b] += 1;
                }
                prev = Some(info.index);
                x = y;
            }
            Err(Error::DepthExceeded { .. }) | Err(Error::BoundaryPoint { .. }) => {
                escaped_at = Some(step);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(OrbitReport {
        branches,
        escaped_at,
        transition_counts: counts,
    })
}
