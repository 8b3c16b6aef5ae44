use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CglError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("requested plateau contains no grid point")]
    EmptyPlateau,
    #[error("localization mask has an empty interior")]
    EmptyInterior,
    #[error("frequency {0:?} lies outside the retained mode box")]
    FrequencyOutOfBox(Vec<i64>),
    #[error("invalid frequency set: {0}")]
    InvalidFrequencySet(String),
    #[error("derivative order {k} outside 1..={q}")]
    DegreeOutOfRange { k: usize, q: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("solution blew up at t = {time} (H^s norm {norm:.3e})")]
    BlowUp { time: f64, norm: f64 },
    #[error("non-finite value encountered at t = {time}")]
    NonFinite { time: f64 },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("amplitude must be positive, got {0}")]
    AmplitudeNonPositive(f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("target not in span (relative residual {residual:.3e})")]
    NotInSpan { residual: f64 },
    #[error("ill-conditioned decomposition (relative residual {residual:.3e})")]
    IllConditioned { residual: f64 },
    #[error("tolerance {tolerance:.3e} unreachable (best error {best:.3e})")]
    ToleranceUnreachable { tolerance: f64, best: f64 },
    #[error("time budget {budget} exceeded (needed {needed})")]
    BudgetExceeded { budget: f64, needed: f64 },
    #[error("saturation insufficient: residual {residual:.3e} at level {level}")]
    SaturationInsufficient { level: usize, residual: f64 },
    #[error("hold failure: {0}")]
    HoldFailure(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

impl CglError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            CglError::BlowUp { .. }
                | CglError::NonFinite { .. }
                | CglError::NotInSpan { .. }
                | CglError::IllConditioned { .. }
                | CglError::ToleranceUnreachable { .. }
                | CglError::BudgetExceeded { .. }
                | CglError::SaturationInsufficient { .. }
                | CglError::HoldFailure(_)
                | CglError::InsufficientData(_)
        )
    }
}

impl From<std::io::Error> for CglError {
    fn from(e: std::io::Error) -> Self {
        CglError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CglError>;
