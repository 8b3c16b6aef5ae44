//! Linearization along a reference trajectory: the Duhamel operator, its
//! adjoint, and finite-probe Gramian tests.

mod context;
mod duhamel;
mod gramian;

pub use crate::dynamics::{apply_q, apply_q_adjoint};
pub use context::LinearizationContext;
pub use duhamel::{control_pairing, control_pairing_trapezoid, solve_adjoint, solve_linearized, AdjointPath, ControlPath};
pub use gramian::{gramian, obstruction_check, GramianReport, ModeResponse};
