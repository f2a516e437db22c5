//! Numerical toolkit for the N-body problem with weak-force potential `1/r^alpha`, `0 < alpha < 1`.
//!
//! * [`space`]: mass-weighted geometry of configurations.
//! * [`dynamics`]: potential, forces, energy and integrators for `m_i x_i'' = dU/dx_i`.
//! * [`action`]: the discretized fixed-energy action and its fixed-time and free-time minimizers.
//! * [`metric`]: estimates of the minimal action `phi_E` and its distance properties.
//! * [`hyperbolic`]: motions with a prescribed limit shape built from chained minimizers.
//! * [`geometry`]: randomized checks of the explicit-constant configuration inequalities.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod hyperbolic;
pub mod io;
pub mod metric;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
