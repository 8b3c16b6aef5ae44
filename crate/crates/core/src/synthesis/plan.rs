use std::io::Write;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dynamics::{solve, CglParams, ConstantForcing, ControlSchedule, Recording, SegmentControl, SolverConfig, Trajectory};
use crate::error::{CglError, Result};
use crate::spectral::{l2_norm, LocalizationMask, SpectralField, TorusGrid};

/// One nonzero Fourier coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficient {
    pub k: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

/// Sparse coefficient list of a field, the serialized form of controls and shifts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldCoefficients(pub Vec<ModeCoefficient>);

impl FieldCoefficients {
    pub fn from_field(u: &SpectralField<f64>) -> Self {
        let grid = u.grid();
        let entries = grid
            .modes()
            .into_iter()
            .filter_map(|(flat, k)| {
                let c = u.coeffs()[flat];
                (c.re != 0.0 || c.im != 0.0).then_some(ModeCoefficient { k, re: c.re, im: c.im })
            })
            .collect();
        Self(entries)
    }

    pub fn to_field(&self, grid: &TorusGrid<f64>) -> Result<SpectralField<f64>> {
        let mut u = SpectralField::zeros(grid);
        for m in &self.0 {
            if !grid.contains_mode(&m.k) {
                return Err(CglError::FrequencyOutOfBox(m.k.clone()));
            }
            u.set_coeff(&m.k, Complex::new(m.re, m.im))?;
        }
        Ok(u)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentKind {
    /// Control `amplitude · η` with `η ∈ H(I)`; over a window of length `1/amplitude`
    /// it moves the state by roughly `χη`.
    Impulse { eta: FieldCoefficients, amplitude: f64 },
    FreeRun,
    /// Uncontrolled run of the equation shifted by `ζ`.
    ShiftedRun { zeta: FieldCoefficients },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSegment {
    #[serde(flatten)]
    pub kind: SegmentKind,
    pub duration: f64,
}

impl ControlSegment {
    pub fn impulse(eta: &SpectralField<f64>, delta: f64) -> Self {
        Self { kind: SegmentKind::Impulse { eta: FieldCoefficients::from_field(eta), amplitude: 1.0 / delta }, duration: delta }
    }

    pub fn free_run(duration: f64) -> Self {
        Self { kind: SegmentKind::FreeRun, duration }
    }

    pub fn shifted_run(zeta: &SpectralField<f64>, duration: f64) -> Self {
        Self { kind: SegmentKind::ShiftedRun { zeta: FieldCoefficients::from_field(zeta) }, duration }
    }
}

/// Predicted state after a planning stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub stage: String,
    pub time: f64,
    pub l2_norm: f64,
}

/// Ordered control segments together with what planning predicted for them.
///
/// Impulse amplitudes refer to the normalized bump `χ / max χ`; [`SynthesisPlan::schedule`]
/// rescales them for the physical mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisPlan {
    pub segments: Vec<ControlSegment>,
    /// Ideal end state the plan aims at.
    pub target: FieldCoefficients,
    /// End state realized while planning.
    pub predicted_final: FieldCoefficients,
    pub predicted_error: f64,
    pub epsilon: f64,
    pub budget: f64,
    pub level: usize,
    pub trace: Vec<TraceEntry>,
}

impl SynthesisPlan {
    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// The plan as solver input for the physical mask.
    pub fn schedule(&self, mask: &LocalizationMask<f64>) -> Result<ControlSchedule<f64>> {
        let grid = mask.grid();
        let inv_max = 1.0 / mask.max();
        let mut out = ControlSchedule::new();
        for seg in &self.segments {
            match &seg.kind {
                SegmentKind::Impulse { eta, amplitude } => {
                    let f = eta.to_field(grid)?.scale(amplitude * inv_max);
                    out.push(seg.duration, SegmentControl::Constant(f), None);
                }
                SegmentKind::FreeRun => {
                    out.push(seg.duration, SegmentControl::None, None);
                }
                SegmentKind::ShiftedRun { zeta } => {
                    out.push(seg.duration, SegmentControl::None, Some(zeta.to_field(grid)?));
                }
            }
        }
        Ok(out)
    }

    /// Runs the plan from scratch.
    pub fn replay(
        &self,
        u0: &SpectralField<f64>,
        h: Option<&SpectralField<f64>>,
        params: &CglParams<f64>,
        mask: &LocalizationMask<f64>,
        config: &SolverConfig<f64>,
        recording: Recording,
    ) -> Result<Trajectory<f64>> {
        let schedule = self.schedule(mask)?;
        if schedule.is_empty() {
            return Ok(Trajectory::start(u0));
        }
        let h = h.map(|f| ConstantForcing(f.clone()));
        solve(u0, &schedule, h.as_ref().map(|f| f as _), params, mask, config, recording)
    }

    /// Segment table as CSV: `index,kind,start,duration,control_l2`.
    pub fn write_segments_csv<W: Write>(&self, w: &mut W, grid: &TorusGrid<f64>) -> Result<()> {
        writeln!(w, "index,kind,start,duration,control_l2")?;
        let mut t = 0.0;
        for (i, seg) in self.segments.iter().enumerate() {
            let (kind, norm) = match &seg.kind {
                SegmentKind::Impulse { eta, amplitude } => ("impulse", l2_norm(&eta.to_field(grid)?) * amplitude),
                SegmentKind::FreeRun => ("free_run", 0.0),
                SegmentKind::ShiftedRun { zeta } => ("shifted_run", l2_norm(&zeta.to_field(grid)?)),
            };
            writeln!(w, "{i},{kind},{t:.16e},{:.16e},{norm:.16e}", seg.duration)?;
            t += seg.duration;
        }
        Ok(())
    }
}
