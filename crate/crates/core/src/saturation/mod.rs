//! Frequency-set algebra: generator tests, saturation chains, polarization and
//! the density diagnostic on the plateau interior.

mod chain;
mod diagnostic;
mod freq;
mod polarization;
mod snf;

pub use chain::{
    chain_linear, chain_linear_clipped, chain_nonlinear, chain_nonlinear_clipped, complex_trig_basis, trig_basis,
    ChainKind, SaturationChain,
};
pub use diagnostic::{
    default_probes, saturation_diagnostic, saturation_diagnostic_with_probes, LevelResidual, SaturationReport,
    SATURATION_THRESHOLD,
};
pub use freq::FrequencySet;
pub use polarization::{polarize_product, Polarization};
pub use snf::{invariant_factors, is_generator, lattice_closure};
