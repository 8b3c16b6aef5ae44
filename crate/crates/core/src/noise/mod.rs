//! Haar-type bounded noise and the sampled observability diagnostic.

mod h4;
mod haar;
mod law;
mod observability;
mod path;

pub use h4::{series_h4, VectorSpace};
pub use haar::haar_basis;
pub use law::ScalarLaw;
pub use observability::{observability_diagnostic, ObservabilityReport};
pub use path::{sample_noise, sample_noise_with, sample_scalar_process, HaarNoiseSpec, ModePaths, NoisePath, ScalarPath};
