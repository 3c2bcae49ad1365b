//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by map construction and evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Interval lengths do not sum to 1/2 within tolerance.
    #[error("interval lengths sum to {sum}, exceeding 1/2 + {tolerance}")]
    NonSummable { sum: f64, tolerance: f64 },

    /// The kneading map violates the branch-linearity condition at some index.
    #[error("kneading condition Q(k+1) > Q(Q^2(k)+1) fails at k = {k}")]
    ConditionFailure { k: usize },

    /// A point lies deeper in the tail than the represented branches resolve.
    #[error("point at distance {distance:.3e} from c is below the resolution of depth {depth}")]
    DepthExceeded { distance: f64, depth: usize },

    /// A point is outside the domain of the requested map.
    #[error("point {x} is outside the domain {domain}")]
    OutsideDomain { x: f64, domain: &'static str },

    /// A point coincides with a precritical endpoint where the induced map is undefined.
    #[error("point {x} is a precritical endpoint")]
    BoundaryPoint { x: f64 },

    /// A parameter is outside its admissible range.
    #[error("parameter {name} = {value} outside {range}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    /// An index exceeds the constructed depth.
    #[error("index {index} exceeds available depth {depth}")]
    IndexOutOfRange { index: usize, depth: usize },

    /// A truncated tail sum has not converged at the available depth.
    #[error("tail sum not converged at depth {depth} (last term ratio {ratio:.3e})")]
    TailTooShort { depth: usize, ratio: f64 },

    /// An iteration failed to converge within its budget.
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// No sign change was found while bracketing a root.
    #[error("no bracket found for {what} within structural bounds")]
    BracketFailure { what: &'static str },

    /// The configured mantissa cannot resolve the requested quantity.
    #[error("required precision exceeds configured {bits}-bit mantissa for {what}")]
    PrecisionExhausted { bits: u32, what: &'static str },

    /// A weight that must be positive was not.
    #[error("weight w_{index} = {value:.6e} is not positive")]
    NonPositiveWeight { index: usize, value: f64 },

    /// The invariant measure is unavailable in the requested regime.
    #[error("invariant measure unavailable: lambda^t = {lambda_t} >= 1/2")]
    InvariantUnavailable { lambda_t: f64 },

    /// The mean inducing time diverges.
    #[error("mean inducing time diverges at t = {t} (t1 = {t1})")]
    InfiniteInducingTime { t: f64, t1: f64 },

    /// A recursion hit a denominator too close to zero.
    #[error("division by near-zero value {value:.3e} at step {index}")]
    DivisionNearZero { index: usize, value: f64 },

    /// The requested combinatorial computation exceeds the budget.
    #[error("partition sum budget exceeded: n_max = {n_max}, states = {states}")]
    CombinatorialOverflow { n_max: usize, states: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
