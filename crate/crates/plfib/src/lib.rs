//! Countably piecewise linear Fibonacci unimodal maps.
//!
//! A one-parameter family of interval maps, affine on countably many
//! intervals accumulating at the critical point, built so that the first
//! return map to the precritical core is again affine on every branch. The
//! crate constructs the maps, runs the induced dynamics as a countable-state
//! random walk, classifies the attractor regime, and computes the
//! thermodynamic side: conformal weights, the pressure function and its
//! phase transition, closed-form invariant measures, equilibrium data,
//! dimension formulas and recurrence classes.
//!
//! Entry points:
//! - [`kneading`]: kneading maps and cutting times.
//! - [`plmap`]: the map `f`, its induced map `F`, and the factor system.
//! - [`walk`]: transition matrices, stationary vectors, drift, regimes.
//! - [`thermo`]: conformal weights, pressure solving, measures, recurrence.
//! - [`mc`]: Monte Carlo walkers and orbit sampling.
//! - [`acceptance`]: the release-gating checks behind `plfib verify`.

// Parameter guards are written `!(x > a && x < b)` so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod dd;
pub mod error;
pub mod kneading;
pub mod mc;
pub mod mpf;
pub mod plmap;
pub mod thermo;
pub mod walk;

pub use error::{Error, Result};
