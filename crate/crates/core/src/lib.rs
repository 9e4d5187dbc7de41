//! Feedback synthesis for virtual affine nonholonomic constraints.
//!
//! Given a mechanical control system (metric, potential, external force and
//! control coframe) and an affine velocity constraint `S(q) q̇ + Z(q) = 0`,
//! this crate computes the unique feedback that keeps the constraint
//! invariant whenever the constraint and the input distribution are
//! transversal, integrates the closed loop, and reports how well the
//! invariance holds numerically.
//!
//! Model data is written in a small expression language ([`expr`]), so every
//! derivative the controller needs is exact. See `examples/` for one runnable
//! program per capability.

pub mod cli;
pub mod constraint;
pub mod control;
mod error;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod modelfile;
pub mod models;
pub mod sim;

pub use constraint::{AffineConstraint, RankReport, TransversalityReport};
pub use control::ControlSolve;
pub use error::{Error, Result};
pub use expr::{Env, Expr};
pub use geometry::{Chart, Christoffel, MechanicalModel, State};
pub use sim::{Settings, Trajectory};
