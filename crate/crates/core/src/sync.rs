//! Projector / shutter / illumination scheduling for one sweep period.
//!
//! Time zero is phase zero of the drive waveform (the single global trigger
//! of the hardware). All times are seconds within one period; commands lead
//! their effects by the matching device delay, wrapping modulo the period.

use crate::etl::{PowerWaveform, Segment, WaveformError};
use crate::optics::{Diopter, PowerSamples};
use crate::Eye;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Waveform(#[from] WaveformError),
    #[error("per-eye sample count {n_prime} exceeds the frame budget {budget} (one slot is reserved for illumination)")]
    BudgetExceeded { n_prime: usize, budget: usize },
    #[error("scheduling conflict:\n{}", conflicts.join("\n"))]
    Conflict { conflicts: Vec<String> },
}

/// Measured command-to-effect delays of the attached devices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceDelays {
    /// Trigger-to-light latency of the projector.
    pub projector_s: f64,
    /// Open-to-closed transition time of an LC shutter.
    pub shutter_close_s: f64,
    /// Closed-to-open transition time of an LC shutter.
    pub shutter_open_s: f64,
}

impl Default for DeviceDelays {
    fn default() -> Self {
        DeviceDelays {
            projector_s: 0.15e-3,
            shutter_close_s: 0.1e-3,
            shutter_open_s: 3.0e-3,
        }
    }
}

/// High-speed projector capabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSpec {
    pub fps: f64,
    pub bit_depth: u8,
    pub grayscale: bool,
}

impl Default for ProjectorSpec {
    fn default() -> Self {
        ProjectorSpec {
            fps: 2000.0,
            bit_depth: 8,
            grayscale: true,
        }
    }
}

impl ProjectorSpec {
    pub fn frame_duration_s(&self) -> f64 {
        1.0 / self.fps
    }
}

/// Number of frames the projector can display during one sweep period.
pub fn frames_per_period(spec: &ProjectorSpec, sweep_hz: f64) -> u32 {
    (spec.fps / sweep_hz).floor() as u32
}

/// Frames available to each eye once one slot is reserved for illumination.
pub fn per_eye_budget(spec: &ProjectorSpec, sweep_hz: f64) -> usize {
    (frames_per_period(spec, sweep_hz) as usize / 2).saturating_sub(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShutterAction {
    Open,
    Close,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    /// Display one slice image for one frame slot.
    ProjectorTrigger {
        slice: usize,
        eye: Eye,
        target_power: Diopter,
    },
    /// Begin a shutter transition; the effect time is when the transition
    /// completes.
    ShutterCommand { eye: Eye, action: ShutterAction },
    /// Display the white surface-illumination frame at zero optical power.
    IlluminationTrigger,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingEvent {
    pub kind: EventKind,
    pub command_time_s: f64,
    pub effect_time_s: f64,
}

/// The ordered event stream for one sweep period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingChart {
    pub period_s: f64,
    pub events: Vec<TimingEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartOptions {
    /// Fire the white illumination frame at every zero crossing rather than
    /// only the first.
    pub illuminate_both_crossings: bool,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            illuminate_both_crossings: true,
        }
    }
}

/// Eye-to-segment assignment: the rising half of the power cycle belongs to
/// the left eye, the falling half to the right.
pub fn segment_for_eye(eye: Eye) -> Segment {
    match eye {
        Eye::Left => Segment::Up,
        Eye::Right => Segment::Down,
    }
}

struct ShutterWindows {
    /// Transition intervals [command, effect] in seconds, unwrapped:
    /// open first, close second.
    transitions: [(f64, f64); 2],
    /// Fully-open interval (open effect, close command), possibly wrapping.
    open_from: f64,
    open_until: f64,
}

impl ShutterWindows {
    fn contains_open(&self, t: f64, period: f64) -> bool {
        let span = (self.open_until - self.open_from).rem_euclid(period);
        let from_start = (t - self.open_from).rem_euclid(period);
        from_start > 0.0 && from_start < span
    }

    fn in_transition(&self, t: f64, period: f64) -> bool {
        self.transitions.iter().any(|&(c, e)| {
            let span = e - c;
            let from_start = (t - c).rem_euclid(period);
            from_start <= span
        })
    }
}

fn shutter_windows(eye: Eye, waveform: &PowerWaveform, delays: &DeviceDelays) -> ShutterWindows {
    let period = waveform.period_s();
    let t_min = waveform.time_of_phase(waveform.min_phase());
    let t_max = waveform.time_of_phase(waveform.max_phase());
    // Transitions straddle the extremum where the power derivative is
    // smallest: the window [command, effect] is centered on the extremum.
    let (open_center, close_center) = match segment_for_eye(eye) {
        Segment::Up => (t_min, t_max),
        Segment::Down => (t_max, t_min),
    };
    let open_cmd = open_center - delays.shutter_open_s / 2.0;
    let open_eff = open_center + delays.shutter_open_s / 2.0;
    let close_cmd = close_center - delays.shutter_close_s / 2.0;
    let close_eff = close_center + delays.shutter_close_s / 2.0;
    ShutterWindows {
        transitions: [(open_cmd, open_eff), (close_cmd, close_eff)],
        open_from: open_eff.rem_euclid(period),
        open_until: close_cmd.rem_euclid(period),
    }
}

/// Builds the one-period chart: per-eye projector triggers on the eye's
/// monotone segment with the projector's phase lead, shutter transitions
/// centered on the power extrema, and white illumination at the zero
/// crossings.
pub fn build_chart(
    waveform: &PowerWaveform,
    samples: &PowerSamples,
    delays: &DeviceDelays,
    projector: &ProjectorSpec,
    options: &ChartOptions,
) -> Result<TimingChart, ScheduleError> {
    let period = waveform.period_s();
    let sweep_hz = waveform.frequency_hz();
    let budget = per_eye_budget(projector, sweep_hz);
    if samples.len() > budget {
        return Err(ScheduleError::BudgetExceeded {
            n_prime: samples.len(),
            budget,
        });
    }
    for &p in samples.powers() {
        // fail early with the waveform's range error
        waveform.phases_for_power(p, Segment::Up)?;
    }

    let mut events = Vec::new();
    let mut conflicts = Vec::new();

    for eye in [Eye::Left, Eye::Right] {
        let segment = segment_for_eye(eye);
        let windows = shutter_windows(eye, waveform, delays);
        for (slice, &power) in samples.powers().iter().enumerate() {
            let phase = waveform.phases_for_power(power, segment)?;
            let effect = waveform.time_of_phase(phase);
            let command = (effect - delays.projector_s).rem_euclid(period);
            if windows.in_transition(effect, period) || !windows.contains_open(effect, period) {
                conflicts.push(format!(
                    "{eye} slice {slice} ({power}) at t={effect:.6}s lands outside the open shutter window"
                ));
            }
            events.push(TimingEvent {
                kind: EventKind::ProjectorTrigger {
                    slice,
                    eye,
                    target_power: power,
                },
                command_time_s: command,
                effect_time_s: effect,
            });
        }
        let actions = [ShutterAction::Open, ShutterAction::Close];
        for (&(cmd, eff), &action) in windows.transitions.iter().zip(actions.iter()) {
            events.push(TimingEvent {
                kind: EventKind::ShutterCommand { eye, action },
                command_time_s: cmd.rem_euclid(period),
                effect_time_s: eff.rem_euclid(period),
            });
        }
    }

    let crossings = waveform.zero_crossing_phases();
    let selected: Vec<f64> = if options.illuminate_both_crossings {
        crossings
    } else {
        crossings.into_iter().take(1).collect()
    };
    for phase in selected {
        let effect = waveform.time_of_phase(phase);
        let command = (effect - delays.projector_s).rem_euclid(period);
        events.push(TimingEvent {
            kind: EventKind::IlluminationTrigger,
            command_time_s: command,
            effect_time_s: effect,
        });
    }

    if !conflicts.is_empty() {
        return Err(ScheduleError::Conflict { conflicts });
    }

    events.sort_by(|a, b| {
        a.effect_time_s
            .partial_cmp(&b.effect_time_s)
            .unwrap()
            .then_with(|| event_order(&a.kind).cmp(&event_order(&b.kind)))
    });
    Ok(TimingChart {
        period_s: period,
        events,
    })
}

fn event_order(kind: &EventKind) -> u8 {
    match kind {
        EventKind::ShutterCommand { .. } => 0,
        EventKind::ProjectorTrigger { .. } => 1,
        EventKind::IlluminationTrigger => 2,
    }
}

impl TimingChart {
    pub fn sweep_hz(&self) -> f64 {
        1.0 / self.period_s
    }

    pub fn projector_triggers(&self) -> impl Iterator<Item = &TimingEvent> {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::ProjectorTrigger { .. }))
    }

    pub fn illumination_triggers(&self) -> impl Iterator<Item = &TimingEvent> {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::IlluminationTrigger))
    }

    /// Open/close windows reconstructed from the chart's shutter commands.
    /// Returns (open_effect, close_command) per eye; an eye frame is visible
    /// strictly inside this cyclic interval.
    pub fn visible_interval(&self, eye: Eye) -> Option<(f64, f64)> {
        let mut open_eff = None;
        let mut close_cmd = None;
        for e in &self.events {
            if let EventKind::ShutterCommand { eye: ev_eye, action } = e.kind {
                if ev_eye == eye {
                    match action {
                        ShutterAction::Open => open_eff = Some(e.effect_time_s),
                        ShutterAction::Close => close_cmd = Some(e.command_time_s),
                    }
                }
            }
        }
        Some((open_eff?, close_cmd?))
    }

    /// True when the given eye sees light at time `t` (shutter fully open,
    /// no transition in progress).
    pub fn eye_sees(&self, eye: Eye, t: f64) -> bool {
        match self.visible_interval(eye) {
            Some((from, until)) => {
                let span = (until - from).rem_euclid(self.period_s);
                let offset = (t - from).rem_euclid(self.period_s);
                offset > 0.0 && offset < span
            }
            None => false,
        }
    }

    /// CSV export: kind, eye, slice, command_time_s, effect_time_s,
    /// target_power_D.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("kind,eye,slice,command_time_s,effect_time_s,target_power_D\n");
        for e in &self.events {
            let (kind, eye, slice, power) = match e.kind {
                EventKind::ProjectorTrigger {
                    slice,
                    eye,
                    target_power,
                } => (
                    "projector_trigger",
                    eye.label(),
                    slice.to_string(),
                    target_power.0.to_string(),
                ),
                EventKind::ShutterCommand { eye, action } => (
                    match action {
                        ShutterAction::Open => "shutter_open",
                        ShutterAction::Close => "shutter_close",
                    },
                    eye.label(),
                    String::new(),
                    String::new(),
                ),
                EventKind::IlluminationTrigger => {
                    ("illumination", "", String::new(), "0".to_string())
                }
            };
            out.push_str(&format!(
                "{kind},{eye},{slice},{},{},{power}\n",
                e.command_time_s, e.effect_time_s
            ));
        }
        out
    }
}

/// Tolerances and thresholds for chart validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidateOptions {
    /// Allowed deviation between a trigger's target power and the waveform
    /// power at its effect time.
    pub power_tolerance_d: f64,
    /// Minimum sweep frequency for flicker fusion.
    pub cff_threshold_hz: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            power_tolerance_d: 0.02,
            cff_threshold_hz: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Machine-readable pass/fail report of the chart's synchronization
/// contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDiagnostics {
    pub checks: Vec<CheckResult>,
}

impl ChartDiagnostics {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Checks the chart against the waveform: (a) trigger powers are met at the
/// effect times, (b) frames land inside their eye's open window, (c)
/// illumination fires at zero power, (d) the sweep clears the flicker-fusion
/// threshold.
pub fn validate_chart(
    chart: &TimingChart,
    waveform: &PowerWaveform,
    options: &ValidateOptions,
) -> ChartDiagnostics {
    let mut checks = Vec::new();
    let tol = options.power_tolerance_d;

    let mut worst_err = 0.0f64;
    let mut power_ok = true;
    let mut power_detail = String::new();
    for e in chart.projector_triggers() {
        if let EventKind::ProjectorTrigger {
            target_power,
            slice,
            eye,
        } = e.kind
        {
            let phase = TAU * e.effect_time_s / chart.period_s;
            let actual = waveform.power_at(phase);
            let err = actual.abs_diff(target_power);
            if err > worst_err {
                worst_err = err;
            }
            if err > tol {
                power_ok = false;
                power_detail.push_str(&format!(
                    "{eye} slice {slice}: target {} but waveform gives {} ({err:.4} D off); ",
                    target_power, actual
                ));
            }
        }
    }
    checks.push(CheckResult {
        name: "trigger_power_match".into(),
        passed: power_ok,
        detail: if power_ok {
            format!("worst error {worst_err:.5} D <= {tol} D")
        } else {
            power_detail
        },
    });

    let mut gating_ok = true;
    let mut gating_detail = String::new();
    for e in chart.projector_triggers() {
        if let EventKind::ProjectorTrigger { eye, slice, .. } = e.kind {
            if !chart.eye_sees(eye, e.effect_time_s) {
                gating_ok = false;
                gating_detail.push_str(&format!(
                    "{eye} slice {slice} at t={:.6}s projected while the {eye} shutter is closed or transitioning; ",
                    e.effect_time_s
                ));
            }
        }
    }
    checks.push(CheckResult {
        name: "shutter_gating".into(),
        passed: gating_ok,
        detail: if gating_ok {
            "every frame lands inside its eye's open window".into()
        } else {
            gating_detail
        },
    });

    let mut illum_ok = true;
    let mut illum_detail = String::new();
    let mut illum_count = 0;
    for e in chart.illumination_triggers() {
        illum_count += 1;
        let phase = TAU * e.effect_time_s / chart.period_s;
        let actual = waveform.power_at(phase);
        if actual.0.abs() > tol {
            illum_ok = false;
            illum_detail.push_str(&format!(
                "illumination at t={:.6}s fires at {} instead of zero power; ",
                e.effect_time_s, actual
            ));
        }
    }
    checks.push(CheckResult {
        name: "illumination_at_zero_power".into(),
        passed: illum_ok,
        detail: if illum_ok {
            format!("{illum_count} pulse(s) within {tol} D of zero")
        } else {
            illum_detail
        },
    });

    let f = chart.sweep_hz();
    let cff_ok = f >= options.cff_threshold_hz;
    checks.push(CheckResult {
        name: "sweep_above_cff".into(),
        passed: cff_ok,
        detail: format!(
            "sweep {f:.1} Hz {} threshold {:.1} Hz",
            if cff_ok { ">=" } else { "<" },
            options.cff_threshold_hz
        ),
    });

    ChartDiagnostics { checks }
}

/// JSON export of a chart together with its diagnostics block.
pub fn chart_json(chart: &TimingChart, diagnostics: &ChartDiagnostics) -> serde_json::Value {
    serde_json::json!({
        "period_s": chart.period_s,
        "sweep_hz": chart.sweep_hz(),
        "events": chart.events,
        "diagnostics": diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::etl::{calibrate_drive, LtiResponse, PowerWaveform};
    use crate::optics::{sample_powers, SweepRange};
    use approx::assert_relative_eq;

    fn test_waveform() -> PowerWaveform {
        // covers [-1.35, 2.35] so samples over [-1, 2] stay clear of the
        // shutter transitions at the extrema
        let target = SweepRange::new(Diopter(-1.35), Diopter(2.35)).unwrap();
        let lti = LtiResponse::new(100.0, 1e9, 1).unwrap();
        let drive = calibrate_drive(target, &lti, 60.0, 10.0).unwrap();
        PowerWaveform::simulate(&drive, &lti, 4096).unwrap()
    }

    fn test_samples() -> PowerSamples {
        sample_powers(SweepRange::new(Diopter(-1.0), Diopter(2.0)).unwrap(), 7).unwrap()
    }

    #[test]
    fn frames_per_period_floor() {
        let spec = ProjectorSpec::default();
        assert_eq!(frames_per_period(&spec, 60.0), 33);
        assert_eq!(frames_per_period(&spec, 2000.0), 1);
        assert_eq!(per_eye_budget(&spec, 60.0), 15);
    }

    #[test]
    fn build_chart_phase_lead() {
        let wf = test_waveform();
        let chart = build_chart(
            &wf,
            &test_samples(),
            &DeviceDelays::default(),
            &ProjectorSpec::default(),
            &ChartOptions::default(),
        )
        .unwrap();
        let lead = 0.15e-3;
        let lead_phase = TAU * 60.0 * lead;
        assert_relative_eq!(lead_phase, 0.0565, epsilon = 1e-3);
        for e in chart.projector_triggers() {
            let gap = (e.effect_time_s - e.command_time_s).rem_euclid(chart.period_s);
            assert_relative_eq!(gap, lead, epsilon = 1e-12);
        }
    }

    #[test]
    fn build_chart_zero_delay_collapses_lead() {
        let wf = test_waveform();
        let delays = DeviceDelays {
            projector_s: 0.0,
            ..DeviceDelays::default()
        };
        let chart = build_chart(
            &wf,
            &test_samples(),
            &delays,
            &ProjectorSpec::default(),
            &ChartOptions::default(),
        )
        .unwrap();
        for e in chart.projector_triggers() {
            assert_eq!(e.command_time_s, e.effect_time_s);
        }
    }

    #[test]
    fn build_chart_event_census() {
        let wf = test_waveform();
        let samples = test_samples();
        let chart = build_chart(
            &wf,
            &samples,
            &DeviceDelays::default(),
            &ProjectorSpec::default(),
            &ChartOptions::default(),
        )
        .unwrap();
        let triggers = chart.projector_triggers().count();
        let shutters = chart
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::ShutterCommand { .. }))
            .count();
        let illum = chart.illumination_triggers().count();
        assert_eq!(triggers, 2 * samples.len());
        assert_eq!(shutters, 4);
        assert_eq!(illum, wf.zero_crossing_phases().len());
        assert_eq!(illum, 2);
    }

    #[test]
    fn build_chart_trigger_times_hit_target_powers() {
        let wf = test_waveform();
        let samples = test_samples();
        let chart = build_chart(
            &wf,
            &samples,
            &DeviceDelays::default(),
            &ProjectorSpec::default(),
            &ChartOptions::default(),
        )
        .unwrap();
        for e in chart.projector_triggers() {
            if let EventKind::ProjectorTrigger { target_power, .. } = e.kind {
                let actual = wf.power_at(TAU * e.effect_time_s / chart.period_s);
                assert!(actual.abs_diff(target_power) < 1e-9);
            }
        }
    }

    #[test]
    fn build_chart_left_right_segments() {
        let wf = test_waveform();
        let chart = build_chart(
            &wf,
            &test_samples(),
            &DeviceDelays::default(),
            &ProjectorSpec::default(),
            &ChartOptions::default(),
        )
        .unwrap();
        for e in chart.projector_triggers() {
            if let EventKind::ProjectorTrigger { eye, .. } = e.kind {
                let phase = TAU * e.effect_time_s / chart.period_s;
                assert_eq!(wf.segment_of_phase(phase), segment_for_eye(eye));
            }
        }
    }

    #[test]
    fn build_chart_rejects_budget_overflow() {
        let wf = test_waveform();
        let samples =
            sample_powers(SweepRange::new(Diopter(-1.0), Diopter(2.0)).unwrap(), 20).unwrap();
        assert!(matches!(
            build_chart(
                &wf,
                &samples,
                &DeviceDelays::default(),
                &ProjectorSpec::default(),
                &ChartOptions::default(),
            ),
            Err(ScheduleError::BudgetExceeded {
                n_prime: 20,
                budget: 15
            })
        ));
    }

    #[test]
    fn build_chart_rejects_unreachable_samples() {
        let wf = test_waveform();
        let samples = PowerSamples::from_diopter_values(&[-3.0, 0.0]).unwrap();
        assert!(matches!(
            build_chart(
                &wf,
                &samples,
                &DeviceDelays::default(),
                &ProjectorSpec::default(),
                &ChartOptions::default(),
            ),
            Err(ScheduleError::Waveform(WaveformError::PowerOutOfRange { .. }))
        ));
    }

    #[test]
    fn build_chart_detects_transition_conflicts() {
        // samples at the waveform extrema collide with the shutter
        // transitions centered there
        let wf = test_waveform();
        let samples = PowerSamples::from_diopter_values(&[wf.min_power().0, 0.0]).unwrap();
        match build_chart(
            &wf,
            &samples,
            &DeviceDelays::default(),
            &ProjectorSpec::default(),
            &ChartOptions::default(),
        ) {
            Err(ScheduleError::Conflict { conflicts }) => {
                assert!(!conflicts.is_empty());
            }
            other => panic!("expected conflict, got {other:?}"),
        }
    }

    #[test]
    fn build_chart_inflated_open_delay_conflicts() {
        let wf = test_waveform();
        let delays = DeviceDelays {
            shutter_open_s: 10.0e-3,
            ..DeviceDelays::default()
        };
        assert!(matches!(
            build_chart(
                &wf,
                &test_samples(),
                &delays,
                &ProjectorSpec::default(),
                &ChartOptions::default(),
            ),
            Err(ScheduleError::Conflict { .. })
        ));
    }

    #[test]
    fn chart_is_deterministic() {
        let wf = test_waveform();
        let build = || {
            build_chart(
                &wf,
                &test_samples(),
                &DeviceDelays::default(),
                &ProjectorSpec::default(),
                &ChartOptions::default(),
            )
            .unwrap()
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn validate_passes_on_built_chart() {
        let wf = test_waveform();
        let chart = build_chart(
            &wf,
            &test_samples(),
            &DeviceDelays::default(),
            &ProjectorSpec::default(),
            &ChartOptions::default(),
        )
        .unwrap();
        let diag = validate_chart(&chart, &wf, &ValidateOptions::default());
        assert!(diag.all_passed(), "{:?}", diag.failed());
    }

    #[test]
    fn validate_detects_effect_time_shift() {
        let wf = test_waveform();
        let mut chart = build_chart(
            &wf,
            &test_samples(),
            &DeviceDelays::default(),
            &ProjectorSpec::default(),
            &ChartOptions::default(),
        )
        .unwrap();
        // model a projector whose true delay is 1 ms longer than assumed
        for e in &mut chart.events {
            if matches!(e.kind, EventKind::ProjectorTrigger { .. }) {
                e.effect_time_s = (e.effect_time_s + 1.0e-3).rem_euclid(chart.period_s);
            }
        }
        let diag = validate_chart(&chart, &wf, &ValidateOptions::default());
        assert!(!diag.all_passed());
        let failed = diag.failed();
        assert!(failed.iter().any(|c| c.name == "trigger_power_match"));
    }

    #[test]
    fn validate_flags_low_sweep_frequency() {
        let target = SweepRange::new(Diopter(-1.35), Diopter(2.35)).unwrap();
        let lti = LtiResponse::new(100.0, 1e9, 1).unwrap();
        let drive = calibrate_drive(target, &lti, 30.0, 10.0).unwrap();
        let wf = PowerWaveform::simulate(&drive, &lti, 4096).unwrap();
        let chart = build_chart(
            &wf,
            &test_samples(),
            &DeviceDelays::default(),
            &ProjectorSpec::default(),
            &ChartOptions::default(),
        )
        .unwrap();
        let diag = validate_chart(&chart, &wf, &ValidateOptions::default());
        assert!(diag
            .checks
            .iter()
            .any(|c| c.name == "sweep_above_cff" && !c.passed));
    }

    #[test]
    fn left_right_symmetry() {
        // relabeling up<->down swaps the eyes' trigger sets exactly
        let wf = test_waveform();
        let samples = test_samples();
        let chart = build_chart(
            &wf,
            &samples,
            &DeviceDelays::default(),
            &ProjectorSpec::default(),
            &ChartOptions::default(),
        )
        .unwrap();
        let mut left: Vec<(usize, f64)> = Vec::new();
        let mut right: Vec<(usize, f64)> = Vec::new();
        for e in chart.projector_triggers() {
            if let EventKind::ProjectorTrigger { slice, eye, .. } = e.kind {
                let phase = TAU * e.effect_time_s / chart.period_s;
                match eye {
                    Eye::Left => left.push((slice, phase)),
                    Eye::Right => right.push((slice, phase)),
                }
            }
        }
        for (slice, phase) in &left {
            let power = samples.powers()[*slice];
            let expected = wf.phases_for_power(power, Segment::Down).unwrap();
            let right_phase = right.iter().find(|(s, _)| s == slice).unwrap().1;
            assert_relative_eq!(right_phase, expected, epsilon = 1e-12);
            // and they are distinct phases away from the extrema
            assert!((phase - right_phase).abs() > 1e-6);
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let wf = test_waveform();
        let chart = build_chart(
            &wf,
            &test_samples(),
            &DeviceDelays::default(),
            &ProjectorSpec::default(),
            &ChartOptions::default(),
        )
        .unwrap();
        let csv = chart.to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "kind,eye,slice,command_time_s,effect_time_s,target_power_D"
        );
        assert_eq!(lines.len(), 1 + chart.events.len());
    }
}
