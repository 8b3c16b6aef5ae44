//! The CGL evolution: operators, the shifted equation, the resolving operator
//! and the Lyapunov functional.

mod lyapunov;
mod operators;
mod params;
mod schedule;
mod solver;
mod trajectory;

pub use lyapunov::lyapunov;
pub use operators::{apply_l, apply_q, apply_q_adjoint, derivative_bk, nonlinearity};
pub use params::{CglParams, SolverConfig};
pub use schedule::{ConstantForcing, ControlSchedule, PiecewiseForcing, ScheduledSegment, SegmentControl, TimeForcing};
pub use solver::{solve, step, time_one_map, Solver};
pub use trajectory::{Recording, Trajectory};

pub(crate) use operators::linear_symbol;
