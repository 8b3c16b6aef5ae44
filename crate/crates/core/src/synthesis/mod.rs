//! Control synthesis: impulses, shifted free runs and their recursive composition.

mod decompose;
mod plan;
mod planner;
mod steer;

pub use decompose::{decompose_target, Decomposition, DECOMPOSITION_TOLERANCE};
pub use plan::{ControlSegment, FieldCoefficients, ModeCoefficient, SegmentKind, SynthesisPlan, TraceEntry};
pub use planner::{impulse_limit_probe, ProbeRow, SynthesisOptions, Synthesizer};
pub use steer::{max_leak, spectral_leak, SteeringReport};
