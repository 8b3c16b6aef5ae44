//! Markov chain ensembles driven by Haar noise and estimates of their mixing.

mod dictionary;
mod ensemble;
mod experiment;
mod fit;

pub use dictionary::{dual_lipschitz_estimate, entry_differences, Coordinate, TestFunction, TestFunctionDictionary, TestShape};
pub use ensemble::{markov_step, Coupling, Ensemble};
pub use fit::{drift_fit, standard_errors, lyapunov_monitor, mixing_rate_fit, DriftFit, LyapunovSummary, MixingFit, MIN_FIT_POINTS};
pub use experiment::{mixing_experiment, MixingRecord, MixingRun};
