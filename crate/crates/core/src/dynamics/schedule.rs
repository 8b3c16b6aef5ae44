use std::fmt;
use std::sync::Arc;

use crate::error::{CglError, Result};
use crate::scalar::Real;
use crate::spectral::SpectralField;

/// A forcing term that is constant between finitely many breakpoints.
pub trait TimeForcing<T: Real>: Send + Sync {
    /// Value on the piece containing `t`.
    fn value_at(&self, t: T) -> SpectralField<T>;
    /// Breakpoints strictly inside `(t0, t1)`, increasing.
    fn breakpoints(&self, t0: T, t1: T) -> Vec<T>;
}

/// Time-independent forcing.
#[derive(Clone, Debug)]
pub struct ConstantForcing<T: Real>(pub SpectralField<T>);

impl<T: Real> TimeForcing<T> for ConstantForcing<T> {
    fn value_at(&self, _t: T) -> SpectralField<T> {
        self.0.clone()
    }

    fn breakpoints(&self, _t0: T, _t1: T) -> Vec<T> {
        Vec::new()
    }
}

/// Forcing equal to `values[i]` on `[edges[i], edges[i+1])`, zero outside.
#[derive(Clone, Debug)]
pub struct PiecewiseForcing<T: Real> {
    edges: Vec<T>,
    values: Vec<SpectralField<T>>,
}

impl<T: Real> PiecewiseForcing<T> {
    pub fn new(edges: Vec<T>, values: Vec<SpectralField<T>>) -> Result<Self> {
        if edges.len() != values.len() + 1 || values.is_empty() {
            return Err(CglError::InvalidSchedule("need one more edge than values".into()));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(CglError::InvalidSchedule("edges must increase".into()));
        }
        Ok(Self { edges, values })
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn values(&self) -> &[SpectralField<T>] {
        &self.values
    }
}

impl<T: Real> TimeForcing<T> for PiecewiseForcing<T> {
    fn value_at(&self, t: T) -> SpectralField<T> {
        let i = self.edges.partition_point(|&e| e <= t);
        if i == 0 || i > self.values.len() {
            SpectralField::zeros(self.values[0].grid())
        } else {
            self.values[i - 1].clone()
        }
    }

    fn breakpoints(&self, t0: T, t1: T) -> Vec<T> {
        self.edges.iter().copied().filter(|&e| e > t0 && e < t1).collect()
    }
}

/// Control acting during one segment; the solver multiplies it by χ.
#[derive(Clone)]
pub enum SegmentControl<T: Real> {
    None,
    Constant(SpectralField<T>),
    /// Time measured from the start of the segment.
    Path(Arc<dyn TimeForcing<T>>),
}

impl<T: Real> fmt::Debug for SegmentControl<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentControl::None => write!(f, "None"),
            SegmentControl::Constant(_) => write!(f, "Constant(..)"),
            SegmentControl::Path(_) => write!(f, "Path(..)"),
        }
    }
}

/// One timed piece of a control schedule, with the shift `ζ` held fixed.
#[derive(Clone, Debug)]
pub struct ScheduledSegment<T: Real> {
    pub duration: T,
    pub control: SegmentControl<T>,
    pub shift: Option<SpectralField<T>>,
}

/// Consecutive segments tiling `[0, T]`.
#[derive(Clone, Debug, Default)]
pub struct ControlSchedule<T: Real> {
    segments: Vec<ScheduledSegment<T>>,
}

impl<T: Real> ControlSchedule<T> {
    pub fn new() -> Self {
        Self { segments: Vec::new() }
    }

    /// Uncontrolled evolution over `[0, duration]`.
    pub fn free(duration: T) -> Self {
        let mut s = Self::new();
        s.push(duration, SegmentControl::None, None);
        s
    }

    pub fn push(&mut self, duration: T, control: SegmentControl<T>, shift: Option<SpectralField<T>>) -> &mut Self {
        self.segments.push(ScheduledSegment { duration, control, shift });
        self
    }

    pub fn extend(&mut self, other: &Self) -> &mut Self {
        self.segments.extend(other.segments.iter().cloned());
        self
    }

    pub fn segments(&self) -> &[ScheduledSegment<T>] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_duration(&self) -> T {
        self.segments.iter().fold(T::zero(), |acc, s| acc + s.duration)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration > T::zero()) || !s.duration.is_finite() {
                return Err(CglError::InvalidSchedule(format!("segment {i} has non-positive duration")));
            }
            if let SegmentControl::Constant(f) = &s.control {
                if !f.is_finite() {
                    return Err(CglError::InvalidSchedule(format!("segment {i} has a non-finite control")));
                }
            }
        }
        Ok(())
    }
}
