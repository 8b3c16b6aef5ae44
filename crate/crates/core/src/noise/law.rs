use rand::Rng;
use serde::{Deserialize, Serialize};

/// Law of the i.i.d. scalars `ξ` in the Haar expansion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarLaw {
    /// Symmetric triangular density on `[-radius, radius]`: Lipschitz,
    /// compactly supported and positive at the origin.
    Triangular { radius: f64 },
    /// Point mass at zero.
    Degenerate,
}

impl Default for ScalarLaw {
    fn default() -> Self {
        ScalarLaw::Triangular { radius: 1.0 }
    }
}

impl ScalarLaw {
    pub fn radius(&self) -> f64 {
        match self {
            ScalarLaw::Triangular { radius } => *radius,
            ScalarLaw::Degenerate => 0.0,
        }
    }

    /// Density (`None` for the point mass).
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            ScalarLaw::Triangular { radius } => Some(((radius - x.abs()) / (radius * radius)).max(0.0)),
            ScalarLaw::Degenerate => None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            ScalarLaw::Triangular { radius } if !(*radius > 0.0 && radius.is_finite()) => {
                Err("law radius must be positive and finite".into())
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            // the sum of two independent uniforms on [0, 1) is triangular on [0, 2)
            ScalarLaw::Triangular { radius } => (rng.random::<f64>() + rng.random::<f64>() - 1.0) * radius,
            ScalarLaw::Degenerate => 0.0,
        }
    }
}
