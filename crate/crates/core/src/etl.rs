//! Drive-to-power model of the electrically focus-tunable lens.
//!
//! The lens behaves as a linear time-invariant system: a sinusoidal drive at
//! frequency `f` produces a periodic optical-power wave `v[phase]`. Measured
//! waveforms need not be sinusoidal, but every valid cycle has exactly one
//! maximum and one minimum, giving a monotone up-segment and down-segment on
//! which phase and power are mutually invertible.

use crate::optics::{Diopter, SweepRange, DEFAULT_POWER_BOUND_D};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WaveformError {
    #[error("waveform needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("row {row}: phase not strictly increasing")]
    NonMonotonePhase { row: usize },
    #[error("row {row}: phase {phase} outside [0, 2pi)")]
    PhaseOutOfRange { row: usize, phase: f64 },
    #[error("row {row}: waveform has more than one maximum or minimum")]
    MultipleExtrema { row: usize },
    #[error("waveform does not cover a full cycle: gap of {gap_rad} rad at row {row}")]
    IncompleteCycle { row: usize, gap_rad: f64 },
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("power {power} D outside waveform range [{min} D, {max} D]")]
    PowerOutOfRange { power: f64, min: f64, max: f64 },
    #[error("target range [{v_low} D, {v_high} D] exceeds the +/-{bound} D hardware bound")]
    Infeasible { v_low: f64, v_high: f64, bound: f64 },
    #[error("flat waveform: maximum equals minimum")]
    FlatWaveform,
    #[error("invalid parameter {name}: {value}")]
    BadParameter { name: &'static str, value: f64 },
}

/// Sinusoidal drive signal for the lens: `i(phase) = offset + amplitude * sin(phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveWaveform {
    pub offset_v: f64,
    pub amplitude_v: f64,
    pub frequency_hz: f64,
}

impl DriveWaveform {
    pub fn new(offset_v: f64, amplitude_v: f64, frequency_hz: f64) -> Result<Self, WaveformError> {
        if !(frequency_hz > 0.0) || !frequency_hz.is_finite() {
            return Err(WaveformError::BadParameter {
                name: "frequency_hz",
                value: frequency_hz,
            });
        }
        if !(amplitude_v >= 0.0) || !amplitude_v.is_finite() {
            return Err(WaveformError::BadParameter {
                name: "amplitude_v",
                value: amplitude_v,
            });
        }
        Ok(DriveWaveform {
            offset_v,
            amplitude_v,
            frequency_hz,
        })
    }

    pub fn value_at(&self, phase: f64) -> f64 {
        self.offset_v + self.amplitude_v * phase.sin()
    }

    pub fn period_s(&self) -> f64 {
        1.0 / self.frequency_hz
    }
}

/// Low-pass frequency response of the lens actuator.
///
/// The filter order is one or two; the second-order form is two cascaded
/// identical first-order sections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LtiResponse {
    pub dc_gain_d_per_v: f64,
    pub cutoff_hz: f64,
    pub order: u32,
}

impl LtiResponse {
    pub fn new(dc_gain_d_per_v: f64, cutoff_hz: f64, order: u32) -> Result<Self, WaveformError> {
        if !(dc_gain_d_per_v > 0.0) || !dc_gain_d_per_v.is_finite() {
            return Err(WaveformError::BadParameter {
                name: "dc_gain_d_per_v",
                value: dc_gain_d_per_v,
            });
        }
        if !(cutoff_hz > 0.0) || !cutoff_hz.is_finite() {
            return Err(WaveformError::BadParameter {
                name: "cutoff_hz",
                value: cutoff_hz,
            });
        }
        if order == 0 || order > 2 {
            return Err(WaveformError::BadParameter {
                name: "order",
                value: order as f64,
            });
        }
        Ok(LtiResponse {
            dc_gain_d_per_v,
            cutoff_hz,
            order,
        })
    }

    /// Magnitude of the frequency response at `f`, relative to DC.
    pub fn magnitude(&self, f_hz: f64) -> f64 {
        let section = 1.0 / (1.0 + (f_hz / self.cutoff_hz).powi(2)).sqrt();
        section.powi(self.order as i32)
    }

    /// Phase lag at `f` in radians, positive meaning the output trails.
    pub fn phase_lag(&self, f_hz: f64) -> f64 {
        self.order as f64 * (f_hz / self.cutoff_hz).atan()
    }
}

impl Default for LtiResponse {
    // Synthetic stand-in used when no measured response is available: a 60 Hz
    // drive passes with mild attenuation.
    fn default() -> Self {
        LtiResponse {
            dc_gain_d_per_v: 100.0,
            cutoff_hz: 200.0,
            order: 2,
        }
    }
}

/// Which monotone half of the power cycle a phase lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Segment {
    /// Rising from the minimum power to the maximum.
    Up,
    /// Falling from the maximum power back to the minimum.
    Down,
}

/// One calibrated cycle of lens optical power indexed by drive phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerWaveform {
    samples: Vec<(f64, Diopter)>,
    period_s: f64,
    min_index: usize,
    max_index: usize,
}

pub const MIN_WAVEFORM_SAMPLES: usize = 16;

impl PowerWaveform {
    /// Validates and wraps one cycle of (phase, power) samples.
    pub fn from_samples(
        samples: Vec<(f64, Diopter)>,
        period_s: f64,
    ) -> Result<Self, WaveformError> {
        if samples.len() < MIN_WAVEFORM_SAMPLES {
            return Err(WaveformError::TooFewSamples {
                min: MIN_WAVEFORM_SAMPLES,
                got: samples.len(),
            });
        }
        if !(period_s > 0.0) || !period_s.is_finite() {
            return Err(WaveformError::BadParameter {
                name: "period_s",
                value: period_s,
            });
        }
        for (row, &(phase, power)) in samples.iter().enumerate() {
            if !(0.0..TAU).contains(&phase) {
                return Err(WaveformError::PhaseOutOfRange { row, phase });
            }
            if !power.0.is_finite() {
                return Err(WaveformError::Parse {
                    row,
                    message: format!("non-finite power {}", power.0),
                });
            }
            if row > 0 && samples[row - 1].0 >= phase {
                return Err(WaveformError::NonMonotonePhase { row });
            }
        }
        // Full-cycle coverage: no cyclic gap larger than a quarter turn.
        let n = samples.len();
        for row in 0..n {
            let next = samples[(row + 1) % n].0;
            let gap = (next - samples[row].0).rem_euclid(TAU);
            let gap = if gap == 0.0 { TAU } else { gap };
            if gap > PI / 2.0 {
                return Err(WaveformError::IncompleteCycle { row, gap_rad: gap });
            }
        }
        let (min_index, max_index) = check_unimodal(&samples)?;
        Ok(PowerWaveform {
            samples,
            period_s,
            min_index,
            max_index,
        })
    }

    /// Steady-state lens output for a sinusoidal drive through the LTI
    /// response, sampled uniformly over one cycle.
    pub fn simulate(
        drive: &DriveWaveform,
        lti: &LtiResponse,
        resolution: usize,
    ) -> Result<Self, WaveformError> {
        if resolution < MIN_WAVEFORM_SAMPLES {
            return Err(WaveformError::TooFewSamples {
                min: MIN_WAVEFORM_SAMPLES,
                got: resolution,
            });
        }
        let gain = lti.dc_gain_d_per_v;
        let mag = lti.magnitude(drive.frequency_hz);
        let lag = lti.phase_lag(drive.frequency_hz);
        let samples = (0..resolution)
            .map(|i| {
                let phase = TAU * i as f64 / resolution as f64;
                let power =
                    gain * (drive.offset_v + drive.amplitude_v * mag * (phase - lag).sin());
                (phase, Diopter(power))
            })
            .collect();
        PowerWaveform::from_samples(samples, drive.period_s())
    }

    /// Parses the two-column calibration format: a header line, then
    /// `phase_radians,power_diopters` records.
    pub fn from_csv_str(text: &str, period_s: f64) -> Result<Self, WaveformError> {
        let mut samples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                continue; // header
            }
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = samples.len();
            let mut cols = line.split(',');
            let phase: f64 = cols
                .next()
                .ok_or_else(|| WaveformError::Parse {
                    row,
                    message: "missing phase column".into(),
                })?
                .trim()
                .parse()
                .map_err(|e| WaveformError::Parse {
                    row,
                    message: format!("bad phase: {e}"),
                })?;
            let power: f64 = cols
                .next()
                .ok_or_else(|| WaveformError::Parse {
                    row,
                    message: "missing power column".into(),
                })?
                .trim()
                .parse()
                .map_err(|e| WaveformError::Parse {
                    row,
                    message: format!("bad power: {e}"),
                })?;
            samples.push((phase, Diopter(power)));
        }
        PowerWaveform::from_samples(samples, period_s)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("phase_radians,power_diopters\n");
        for &(phase, power) in &self.samples {
            out.push_str(&format!("{phase},{}\n", power.0));
        }
        out
    }

    pub fn samples(&self) -> &[(f64, Diopter)] {
        &self.samples
    }

    pub fn period_s(&self) -> f64 {
        self.period_s
    }

    pub fn frequency_hz(&self) -> f64 {
        1.0 / self.period_s
    }

    pub fn min_power(&self) -> Diopter {
        self.samples[self.min_index].1
    }

    pub fn max_power(&self) -> Diopter {
        self.samples[self.max_index].1
    }

    pub fn min_phase(&self) -> f64 {
        self.samples[self.min_index].0
    }

    pub fn max_phase(&self) -> f64 {
        self.samples[self.max_index].0
    }

    pub fn phase_of_time(&self, t_s: f64) -> f64 {
        (TAU * t_s / self.period_s).rem_euclid(TAU)
    }

    pub fn time_of_phase(&self, phase: f64) -> f64 {
        phase.rem_euclid(TAU) / TAU * self.period_s
    }

    /// Linearly interpolated power at any phase; 2pi-periodic.
    pub fn power_at(&self, phase: f64) -> Diopter {
        let phase = phase.rem_euclid(TAU);
        let n = self.samples.len();
        let idx = self.samples.partition_point(|&(p, _)| p <= phase);
        // bracket [idx-1, idx], wrapping at both ends of the stored cycle
        let (p0, v0, p1, v1) = if idx == 0 {
            let (pl, vl) = self.samples[n - 1];
            let (pr, vr) = self.samples[0];
            (pl - TAU, vl.0, pr, vr.0)
        } else if idx == n {
            let (pl, vl) = self.samples[n - 1];
            let (pr, vr) = self.samples[0];
            (pl, vl.0, pr + TAU, vr.0)
        } else {
            let (pl, vl) = self.samples[idx - 1];
            let (pr, vr) = self.samples[idx];
            (pl, vl.0, pr, vr.0)
        };
        if phase == p0 {
            return Diopter(v0);
        }
        let t = (phase - p0) / (p1 - p0);
        Diopter(v0 + t * (v1 - v0))
    }

    /// Indices of the samples on one monotone segment, in traversal order
    /// from one extremum to the other (inclusive).
    fn segment_indices(&self, segment: Segment) -> Vec<usize> {
        let n = self.samples.len();
        let (from, to) = match segment {
            Segment::Up => (self.min_index, self.max_index),
            Segment::Down => (self.max_index, self.min_index),
        };
        let mut idx = Vec::new();
        let mut i = from;
        loop {
            idx.push(i);
            if i == to {
                break;
            }
            i = (i + 1) % n;
        }
        idx
    }

    /// The unique phase on the requested monotone segment where the
    /// interpolated power equals `v`.
    pub fn phases_for_power(&self, v: Diopter, segment: Segment) -> Result<f64, WaveformError> {
        let (lo, hi) = (self.min_power().0, self.max_power().0);
        if !(v.0 >= lo && v.0 <= hi) {
            return Err(WaveformError::PowerOutOfRange {
                power: v.0,
                min: lo,
                max: hi,
            });
        }
        let idx = self.segment_indices(segment);
        // walk the segment for the first bracketing pair
        for w in idx.windows(2) {
            let (p0, v0) = self.samples[w[0]];
            let (p1, v1) = self.samples[w[1]];
            let (lo_v, hi_v) = if v0.0 <= v1.0 { (v0.0, v1.0) } else { (v1.0, v0.0) };
            if v.0 >= lo_v && v.0 <= hi_v {
                let p1 = if p1 <= p0 { p1 + TAU } else { p1 };
                if v1.0 == v0.0 {
                    return Ok(p0.rem_euclid(TAU));
                }
                let t = (v.0 - v0.0) / (v1.0 - v0.0);
                return Ok((p0 + t * (p1 - p0)).rem_euclid(TAU));
            }
        }
        // v equals an extremum that the scan skipped due to rounding
        if (v.0 - lo).abs() <= (v.0 - hi).abs() {
            Ok(self.min_phase())
        } else {
            Ok(self.max_phase())
        }
    }

    /// Phases at which the interpolated power crosses zero, ascending.
    pub fn zero_crossing_phases(&self) -> Vec<f64> {
        let mut crossings = Vec::new();
        let n = self.samples.len();
        for i in 0..n {
            let (p0, v0) = self.samples[i];
            let (mut p1, v1) = self.samples[(i + 1) % n];
            if p1 <= p0 {
                p1 += TAU;
            }
            if v0.0 == 0.0 {
                crossings.push(p0);
            } else if (v0.0 < 0.0) != (v1.0 < 0.0) && v1.0 != 0.0 {
                let t = (0.0 - v0.0) / (v1.0 - v0.0);
                crossings.push((p0 + t * (p1 - p0)).rem_euclid(TAU));
            }
        }
        crossings.sort_by(|a, b| a.partial_cmp(b).unwrap());
        crossings
    }

    /// Segment a phase belongs to.
    pub fn segment_of_phase(&self, phase: f64) -> Segment {
        let phase = phase.rem_euclid(TAU);
        let (pmin, pmax) = (self.min_phase(), self.max_phase());
        let up_len = (pmax - pmin).rem_euclid(TAU);
        let from_min = (phase - pmin).rem_euclid(TAU);
        if from_min <= up_len {
            Segment::Up
        } else {
            Segment::Down
        }
    }
}

/// Exactly one maximum and one minimum per cycle; returns their indices.
/// Flat runs extend the current direction.
fn check_unimodal(samples: &[(f64, Diopter)]) -> Result<(usize, usize), WaveformError> {
    let n = samples.len();
    let mut direction = 0i8; // +1 rising, -1 falling
    let mut changes = 0usize;
    let mut first_dir = 0i8;
    for i in 0..n {
        let a = samples[i].1 .0;
        let b = samples[(i + 1) % n].1 .0;
        let d = if b > a {
            1
        } else if b < a {
            -1
        } else {
            0
        };
        if d == 0 {
            continue;
        }
        if direction == 0 {
            direction = d;
            first_dir = d;
        } else if d != direction {
            changes += 1;
            direction = d;
            if changes > 2 {
                return Err(WaveformError::MultipleExtrema { row: i });
            }
        }
    }
    if direction == 0 {
        return Err(WaveformError::FlatWaveform);
    }
    // wrap-around direction change between the last run and the first
    if direction != first_dir {
        changes += 1;
    }
    if changes != 2 {
        return Err(WaveformError::MultipleExtrema { row: n - 1 });
    }
    let mut min_index = 0;
    let mut max_index = 0;
    for (i, &(_, v)) in samples.iter().enumerate() {
        if v.0 < samples[min_index].1 .0 {
            min_index = i;
        }
        if v.0 > samples[max_index].1 .0 {
            max_index = i;
        }
    }
    if samples[min_index].1 == samples[max_index].1 {
        return Err(WaveformError::FlatWaveform);
    }
    Ok((min_index, max_index))
}

/// Drive parameters whose simulated output covers the target sweep range.
///
/// The LTI gain is linear, so the offset and amplitude each come from one
/// linear solve; the result is verified closed-loop to 0.01 D.
pub fn calibrate_drive(
    target: SweepRange,
    lti: &LtiResponse,
    frequency_hz: f64,
    power_bound_d: f64,
) -> Result<DriveWaveform, WaveformError> {
    if target.v_low.0.abs() > power_bound_d || target.v_high.0.abs() > power_bound_d {
        return Err(WaveformError::Infeasible {
            v_low: target.v_low.0,
            v_high: target.v_high.0,
            bound: power_bound_d,
        });
    }
    let mean = 0.5 * (target.v_low.0 + target.v_high.0);
    let half_range = 0.5 * target.span_d();
    let offset_v = mean / lti.dc_gain_d_per_v;
    let amplitude_v = half_range / (lti.dc_gain_d_per_v * lti.magnitude(frequency_hz));
    let drive = DriveWaveform::new(offset_v, amplitude_v, frequency_hz)?;
    let check = PowerWaveform::simulate(&drive, lti, 4096)?;
    let tol = 0.01;
    if (check.min_power().0 - target.v_low.0).abs() > tol
        || (check.max_power().0 - target.v_high.0).abs() > tol
    {
        return Err(WaveformError::Infeasible {
            v_low: target.v_low.0,
            v_high: target.v_high.0,
            bound: power_bound_d,
        });
    }
    Ok(drive)
}

/// Convenience used by feasibility checks.
pub fn default_power_bound() -> f64 {
    DEFAULT_POWER_BOUND_D
}
