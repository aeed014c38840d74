//! Exact reduction of stochastic differential equations with a fast attracting manifold of
//! equilibria to a lower-dimensional SDE on that manifold.
//!
//! The core entry point is [`reduction::reduce_at`], which computes the projection matrix `P`,
//! the curvature tensor `Q` and the noise-induced drift `g` at a point of the slow manifold by
//! one of four routes: 1-D charts, co-dimension-one factorizations, the general eigenbasis
//! construction, or finite differences of the numerically integrated flow map.
//! [`simulate`] holds the Euler–Maruyama, Gillespie and particle simulators used to validate
//! reductions, and [`models`] the built-in models with closed-form answers.

pub mod cli;
pub mod config;
pub mod diff;
pub mod error;
pub mod expr;
pub mod flow;
pub mod jump;
pub mod linalg;
pub mod manifold;
pub mod model;
pub mod models;
pub mod plot;
pub mod reduction;
pub mod simulate;

pub use error::{Error, Result};
pub use manifold::{CoDimOneChart, CurveChart, ManifoldSpec};
pub use model::SdeSystem;
pub use reduction::{reduce_at, ManifoldPoint, Method, ReducedSystem, ReductionOptions};
