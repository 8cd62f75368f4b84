//! Thin-lens placement math for a focal-sweep display.
//!
//! All distances are measured in meters along the tunable lens' optical axis
//! from the lens plane; optical powers are in diopters (1/m). Positive power
//! moves the virtual image of a lit surface farther from the lens.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Optical power range of the tunable lens hardware, in diopters.
pub const DEFAULT_POWER_BOUND_D: f64 = 10.0;

/// Sampling interval above which focus cues stop being perceptually
/// continuous, in diopters.
pub const GUIDELINE_INTERVAL_D: f64 = 0.6;

#[derive(Debug, Error, PartialEq)]
pub enum OpticsError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositiveDistance { name: &'static str, value: f64 },
    #[error("{name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("negative value for {name}: {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("power {power} D at surface distance {d_p} m forms a real image, not a virtual one")]
    RealImage { d_p: f64, power: f64 },
    #[error("near extent {d_vn} m reaches past the surface at {d_p} m")]
    NearEndCrossesLens { d_p: f64, d_vn: f64 },
    #[error("sweep range requires v_low < v_high, got [{v_low}, {v_high}]")]
    EmptyRange { v_low: f64, v_high: f64 },
    #[error("need at least one power sample")]
    NoSamples,
    #[error("power samples must be strictly increasing (index {index})")]
    UnsortedSamples { index: usize },
}

/// Signed optical power in diopters.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Diopter(pub f64);

impl Diopter {
    pub const ZERO: Diopter = Diopter(0.0);

    pub fn d(self) -> f64 {
        self.0
    }

    pub fn abs_diff(self, other: Diopter) -> f64 {
        (self.0 - other.0).abs()
    }
}

impl std::fmt::Display for Diopter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} D", self.0)
    }
}

/// Distance along the optical axis from the lens plane. Optical infinity is
/// a distinguished value with reciprocal exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Distance {
    Finite(f64),
    Infinite,
}

impl Distance {
    pub const INFINITE: Distance = Distance::Infinite;

    /// A validated nonnegative finite distance.
    pub fn meters(value: f64) -> Result<Distance, OpticsError> {
        if !value.is_finite() {
            return Err(OpticsError::NotFinite { name: "distance", value });
        }
        if value < 0.0 {
            return Err(OpticsError::Negative { name: "distance", value });
        }
        Ok(Distance::Finite(value))
    }

    /// 1/d, with 1/infinity = 0.
    pub fn reciprocal(self) -> f64 {
        match self {
            Distance::Finite(v) => 1.0 / v,
            Distance::Infinite => 0.0,
        }
    }

    pub fn as_meters(self) -> Option<f64> {
        match self {
            Distance::Finite(v) => Some(v),
            Distance::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Distance::Infinite)
    }

    fn positive_meters(self, name: &'static str) -> Result<f64, OpticsError> {
        match self {
            Distance::Finite(v) if v > 0.0 && v.is_finite() => Ok(v),
            Distance::Finite(v) => Err(OpticsError::NonPositiveDistance { name, value: v }),
            Distance::Infinite => Err(OpticsError::NonPositiveDistance {
                name,
                value: f64::INFINITY,
            }),
        }
    }

    fn nonnegative_meters(self, name: &'static str) -> Result<f64, OpticsError> {
        match self {
            Distance::Finite(v) if v >= 0.0 && v.is_finite() => Ok(v),
            Distance::Finite(v) => Err(OpticsError::Negative { name, value: v }),
            Distance::Infinite => Err(OpticsError::NotFinite {
                name,
                value: f64::INFINITY,
            }),
        }
    }
}

impl std::fmt::Display for Distance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Distance::Finite(v) => write!(f, "{v} m"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

/// Optical power interval swept once per period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub v_low: Diopter,
    pub v_high: Diopter,
}

impl SweepRange {
    pub fn new(v_low: Diopter, v_high: Diopter) -> Result<SweepRange, OpticsError> {
        if !(v_low.0 < v_high.0) || !v_low.0.is_finite() || !v_high.0.is_finite() {
            return Err(OpticsError::EmptyRange {
                v_low: v_low.0,
                v_high: v_high.0,
            });
        }
        Ok(SweepRange { v_low, v_high })
    }

    pub fn span_d(self) -> f64 {
        self.v_high.0 - self.v_low.0
    }

    /// Widens both ends by `margin` diopters.
    pub fn padded(self, margin: f64) -> SweepRange {
        SweepRange {
            v_low: Diopter(self.v_low.0 - margin),
            v_high: Diopter(self.v_high.0 + margin),
        }
    }
}

/// The optical powers at which projector frames are displayed, sorted
/// ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSamples {
    powers: Vec<Diopter>,
    guideline_interval_d: f64,
}

impl PowerSamples {
    pub fn new(powers: Vec<Diopter>) -> Result<PowerSamples, OpticsError> {
        if powers.is_empty() {
            return Err(OpticsError::NoSamples);
        }
        for (i, pair) in powers.windows(2).enumerate() {
            if !(pair[0].0 < pair[1].0) {
                return Err(OpticsError::UnsortedSamples { index: i + 1 });
            }
        }
        for (i, p) in powers.iter().enumerate() {
            if !p.0.is_finite() {
                return Err(OpticsError::UnsortedSamples { index: i });
            }
        }
        Ok(PowerSamples {
            powers,
            guideline_interval_d: GUIDELINE_INTERVAL_D,
        })
    }

    pub fn from_diopter_values(values: &[f64]) -> Result<PowerSamples, OpticsError> {
        PowerSamples::new(values.iter().copied().map(Diopter).collect())
    }

    pub fn powers(&self) -> &[Diopter] {
        &self.powers
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn first(&self) -> Diopter {
        self.powers[0]
    }

    pub fn last(&self) -> Diopter {
        *self.powers.last().unwrap()
    }

    /// Largest gap between consecutive samples; zero for a single sample.
    pub fn max_spacing_d(&self) -> f64 {
        self.powers
            .windows(2)
            .map(|w| w[1].0 - w[0].0)
            .fold(0.0, f64::max)
    }

    /// True when the spacing breaks the perceptual-continuity guideline.
    pub fn exceeds_guideline(&self) -> bool {
        self.max_spacing_d() > self.guideline_interval_d
    }

    pub fn guideline_interval_d(&self) -> f64 {
        self.guideline_interval_d
    }
}

/// Radiance split between the two samples bracketing a target power.
/// `radiance_lower + radiance_upper` reproduces the input radiance exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceWeights {
    pub lower_index: usize,
    pub radiance_lower: f64,
    pub radiance_upper: f64,
}

impl SliceWeights {
    pub fn upper_index(&self) -> usize {
        self.lower_index + 1
    }
}

/// Optical power that places the virtual image of content projected on a
/// surface at `d_p` at the desired distance `d_v`: `v = 1/d_p - 1/d_v`.
pub fn required_power(d_p: Distance, d_v: Distance) -> Result<Diopter, OpticsError> {
    let dp = d_p.positive_meters("d_p")?;
    let inv_dv = match d_v {
        Distance::Infinite => 0.0,
        Distance::Finite(_) => 1.0 / d_v.positive_meters("d_v")?,
    };
    Ok(Diopter(1.0 / dp - inv_dv))
}

/// Where the virtual image lands for a given surface distance and lens
/// power; inverse of [`required_power`] in its second argument.
pub fn virtual_distance(d_p: Distance, v: Diopter) -> Result<Distance, OpticsError> {
    let dp = d_p.positive_meters("d_p")?;
    if !v.0.is_finite() {
        return Err(OpticsError::NotFinite { name: "power", value: v.0 });
    }
    let inv_dv = 1.0 / dp - v.0;
    if inv_dv == 0.0 {
        Ok(Distance::Infinite)
    } else if inv_dv < 0.0 {
        Err(OpticsError::RealImage { d_p: dp, power: v.0 })
    } else {
        Ok(Distance::Finite(1.0 / inv_dv))
    }
}

/// Sweep range that moves the virtual image of content on a surface at
/// `d_p` from `d_vn` in front of the surface to `d_vf` behind it.
pub fn sweep_range(
    d_p: Distance,
    d_vn: Distance,
    d_vf: Distance,
) -> Result<SweepRange, OpticsError> {
    let dp = d_p.positive_meters("d_p")?;
    let dvn = d_vn.positive_meters("d_vn")?;
    if dvn >= dp {
        return Err(OpticsError::NearEndCrossesLens { d_p: dp, d_vn: dvn });
    }
    let inv_far = match d_vf {
        Distance::Infinite => 0.0,
        Distance::Finite(_) => {
            let dvf = d_vf.positive_meters("d_vf")?;
            1.0 / (dp + dvf)
        }
    };
    let v_low = Diopter(1.0 / dp - 1.0 / (dp - dvn));
    let v_high = Diopter(1.0 / dp - inv_far);
    SweepRange::new(v_low, v_high)
}

/// Uniform dioptric sampling of a sweep range, endpoints included for two or
/// more samples; a single sample sits at the midpoint. Spacing above the
/// 0.6 D guideline is reported by [`PowerSamples::exceeds_guideline`].
pub fn sample_powers(range: SweepRange, n_prime: usize) -> Result<PowerSamples, OpticsError> {
    if n_prime == 0 {
        return Err(OpticsError::NoSamples);
    }
    let powers = if n_prime == 1 {
        vec![Diopter(0.5 * (range.v_low.0 + range.v_high.0))]
    } else {
        let step = range.span_d() / (n_prime - 1) as f64;
        (0..n_prime)
            .map(|i| {
                if i + 1 == n_prime {
                    range.v_high
                } else {
                    Diopter(range.v_low.0 + step * i as f64)
                }
            })
            .collect()
    };
    PowerSamples::new(powers)
}

/// Index of the sampled power closest to `v`; ties go to the lower index and
/// out-of-range values clamp to the nearest endpoint.
pub fn assign_slice(v: Diopter, samples: &PowerSamples) -> usize {
    let powers = samples.powers();
    // Samples are sorted, so only the two neighbors of the insertion point
    // can win; the tie rule falls out of strict comparison.
    let idx = powers.partition_point(|p| p.0 < v.0);
    if idx == 0 {
        return 0;
    }
    if idx == powers.len() {
        return powers.len() - 1;
    }
    let below = v.0 - powers[idx - 1].0;
    let above = powers[idx].0 - v.0;
    if below <= above {
        idx - 1
    } else {
        idx
    }
}

/// Splits radiance `r` between the two samples bracketing `v`, linearly in
/// diopters. Values outside the sampled range put the full radiance on the
/// nearest endpoint. The two parts always sum to `r` bit-exactly.
pub fn depth_filter(
    r: f64,
    v: Diopter,
    samples: &PowerSamples,
) -> Result<SliceWeights, OpticsError> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(OpticsError::Negative { name: "radiance", value: r });
    }
    let powers = samples.powers();
    let n = powers.len();
    if n == 1 || v.0 <= powers[0].0 {
        return Ok(SliceWeights {
            lower_index: 0,
            radiance_lower: r,
            radiance_upper: 0.0,
        });
    }
    if v.0 >= powers[n - 1].0 {
        return Ok(SliceWeights {
            lower_index: n - 2,
            radiance_lower: 0.0,
            radiance_upper: r,
        });
    }
    let lower = powers.partition_point(|p| p.0 <= v.0) - 1;
    let v_lo = powers[lower].0;
    let v_hi = powers[lower + 1].0;
    let t = (v.0 - v_lo) / (v_hi - v_lo);
    let radiance_lower = r * (1.0 - t);
    let mut radiance_upper = r - radiance_lower;
    // Nudge so the pair is a bit-exact partition of r even when the
    // subtraction rounded.
    for _ in 0..4 {
        let sum = radiance_lower + radiance_upper;
        if sum == r {
            break;
        }
        radiance_upper = if sum > r {
            f64_next_down(radiance_upper)
        } else {
            f64_next_up(radiance_upper)
        };
    }
    Ok(SliceWeights {
        lower_index: lower,
        radiance_lower,
        radiance_upper,
    })
}

fn f64_next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else if x > 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else {
        f64::from_bits(x.to_bits() - 1)
    }
}

fn f64_next_down(x: f64) -> f64 {
    if x == 0.0 {
        -f64::from_bits(1)
    } else if x > 0.0 {
        f64::from_bits(x.to_bits() - 1)
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}

/// Size factor that keeps the retinal extent of a part constant when its
/// virtual image moves from the surface distance `d_p` to `d_v`, for an eye
/// sitting `d_e` behind the lens: `d_p (d_v + d_e) / (d_v (d_p + d_e))`.
pub fn breathing_scale(
    d_p: Distance,
    d_v: Distance,
    d_e: Distance,
) -> Result<f64, OpticsError> {
    let dp = d_p.positive_meters("d_p")?;
    let de = d_e.nonnegative_meters("d_e")?;
    match d_v {
        Distance::Infinite => Ok(dp / (dp + de)),
        Distance::Finite(_) => {
            let dv = d_v.positive_meters("d_v")?;
            Ok(dp * (dv + de) / (dv * (dp + de)))
        }
    }
}

/// Ratio by which the virtual projector's field of view must be multiplied
/// to resize a part whose far edge sits `half_extent` off-axis on the
/// surface by `scale`: an arctangent ratio measured from the eye.
pub fn fov_scale(
    half_extent: Distance,
    scale: f64,
    d_e: Distance,
    d_p: Distance,
) -> Result<f64, OpticsError> {
    let h = half_extent.positive_meters("half_extent")?;
    let de = d_e.nonnegative_meters("d_e")?;
    let dp = d_p.positive_meters("d_p")?;
    if !scale.is_finite() || scale <= 0.0 {
        return Err(OpticsError::NonPositiveDistance {
            name: "scale",
            value: scale,
        });
    }
    let reach = de + dp;
    Ok((scale * h / reach).atan() / (h / reach).atan())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(v: f64) -> Distance {
        Distance::Finite(v)
    }

    #[test]
    fn required_power_matches_reference_placements() {
        // Flat screen at 500 mm, targets at 333.3/500/1000 mm.
        let v = required_power(m(0.5), m(1.0 / 3.0)).unwrap();
        assert_relative_eq!(v.0, -1.0, max_relative = 1e-12);
        let v = required_power(m(0.5), m(0.5)).unwrap();
        assert_eq!(v.0, 0.0);
        // Screen at 2.5 m, targets at 400/500 mm.
        let v = required_power(m(2.5), m(0.4)).unwrap();
        assert_relative_eq!(v.0, -2.1, max_relative = 1e-12);
        let v = required_power(m(2.5), m(0.5)).unwrap();
        assert_relative_eq!(v.0, -1.6, max_relative = 1e-12);
    }

    #[test]
    fn required_power_of_infinite_target() {
        let v = required_power(m(0.5), Distance::Infinite).unwrap();
        assert_eq!(v.0, 2.0);
    }

    #[test]
    fn required_power_rejects_bad_distances() {
        assert!(matches!(
            required_power(m(0.0), m(1.0)),
            Err(OpticsError::NonPositiveDistance { name: "d_p", .. })
        ));
        assert!(matches!(
            required_power(m(1.0), m(-0.5)),
            Err(OpticsError::NonPositiveDistance { name: "d_v", .. })
        ));
        assert!(required_power(Distance::Infinite, m(1.0)).is_err());
    }

    #[test]
    fn virtual_distance_zero_power_is_identity() {
        assert_eq!(virtual_distance(m(0.5), Diopter::ZERO).unwrap(), m(0.5));
    }

    #[test]
    fn virtual_distance_reaches_infinity() {
        assert_eq!(
            virtual_distance(m(0.5), Diopter(2.0)).unwrap(),
            Distance::Infinite
        );
    }

    #[test]
    fn virtual_distance_solves_negative_power() {
        // 1/d_v = 1/0.5 - (-1) = 3
        let d = virtual_distance(m(0.5), Diopter(-1.0)).unwrap();
        assert_relative_eq!(d.as_meters().unwrap(), 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn virtual_distance_rejects_real_images() {
        assert!(matches!(
            virtual_distance(m(0.5), Diopter(3.0)),
            Err(OpticsError::RealImage { .. })
        ));
    }

    #[test]
    fn thin_lens_round_trip() {
        let d_p = m(0.47);
        let d_v = m(1.234);
        let v = required_power(d_p, d_v).unwrap();
        let back = virtual_distance(d_p, v).unwrap();
        assert_relative_eq!(
            back.as_meters().unwrap(),
            d_v.as_meters().unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn sweep_range_reference_case() {
        // Screen at 500 mm, near end 167 mm in front, far end at infinity.
        let r = sweep_range(m(0.5), m(0.167), Distance::Infinite).unwrap();
        assert!((r.v_low.0 - -1.0).abs() < 0.005);
        assert_eq!(r.v_high.0, 2.0);
    }

    #[test]
    fn sweep_range_finite_far_end() {
        let r = sweep_range(m(1.0 / 3.0), m(1.0 / 6.0), m(2.5)).unwrap();
        assert_relative_eq!(r.v_low.0, -3.0, max_relative = 1e-12);
        // 3 - 1/(1/3 + 5/2) = 3 - 6/17 = 45/17
        assert_relative_eq!(r.v_high.0, 45.0 / 17.0, max_relative = 1e-12);
    }

    #[test]
    fn sweep_range_degenerates_to_zero_extent() {
        let r = sweep_range(m(0.5), m(1e-9), m(1e-9)).unwrap();
        assert!(r.v_low.0 < 0.0 && r.v_low.0 > -1e-7);
        assert!(r.v_high.0 > 0.0 && r.v_high.0 < 1e-7);
    }

    #[test]
    fn sweep_range_rejects_near_end_past_lens() {
        assert!(matches!(
            sweep_range(m(0.5), m(0.5), Distance::Infinite),
            Err(OpticsError::NearEndCrossesLens { .. })
        ));
        assert!(sweep_range(m(0.5), m(0.6), Distance::Infinite).is_err());
    }

    #[test]
    fn sweep_range_identities() {
        // Algebraic identity: the range endpoints place the image exactly at
        // d_p - d_vn and d_p + d_vf.
        let (dp, dvn, dvf) = (0.5, 0.167, 0.8);
        let r = sweep_range(m(dp), m(dvn), m(dvf)).unwrap();
        let near = virtual_distance(m(dp), r.v_low).unwrap();
        let far = virtual_distance(m(dp), r.v_high).unwrap();
        assert_relative_eq!(near.as_meters().unwrap(), dp - dvn, max_relative = 1e-12);
        assert_relative_eq!(far.as_meters().unwrap(), dp + dvf, max_relative = 1e-12);
    }

    #[test]
    fn sample_powers_uniform_seven() {
        let r = SweepRange::new(Diopter(-1.0), Diopter(2.0)).unwrap();
        let s = sample_powers(r, 7).unwrap();
        let got: Vec<f64> = s.powers().iter().map(|p| p.0).collect();
        let want = [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];
        for (g, w) in got.iter().zip(want.iter()) {
            assert_relative_eq!(g, w, epsilon = 1e-12);
        }
        assert!(!s.exceeds_guideline());
        assert_relative_eq!(s.max_spacing_d(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn sample_powers_guideline_warning() {
        let r = SweepRange::new(Diopter(-1.0), Diopter(2.0)).unwrap();
        let s = sample_powers(r, 4).unwrap();
        assert_relative_eq!(s.max_spacing_d(), 1.0, epsilon = 1e-12);
        assert!(s.exceeds_guideline());
    }

    #[test]
    fn sample_powers_single_sample_midpoint() {
        let r = SweepRange::new(Diopter(-1e-12), Diopter(1e-12)).unwrap();
        let s = sample_powers(r, 1).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.first().0.abs() < 1e-12);
    }

    #[test]
    fn sample_powers_zero_count_errors() {
        let r = SweepRange::new(Diopter(0.0), Diopter(1.0)).unwrap();
        assert_eq!(sample_powers(r, 0), Err(OpticsError::NoSamples));
    }

    #[test]
    fn assign_slice_picks_nearest() {
        let s = PowerSamples::from_diopter_values(&[-1.0, -0.5, 0.0, 0.5, 1.0, 1.5]).unwrap();
        assert_eq!(assign_slice(Diopter(0.2), &s), 2);
        // exact sample
        assert_eq!(assign_slice(Diopter(-0.5), &s), 1);
        // clamping
        assert_eq!(assign_slice(Diopter(-9.0), &s), 0);
        assert_eq!(assign_slice(Diopter(9.0), &s), 5);
    }

    #[test]
    fn assign_slice_tie_goes_low() {
        let s = PowerSamples::from_diopter_values(&[0.0, 0.5]).unwrap();
        assert_eq!(assign_slice(Diopter(0.25), &s), 0);
    }

    #[test]
    fn assign_slice_matches_brute_force() {
        let s = PowerSamples::from_diopter_values(&[-1.0, -0.3, 0.1, 0.45, 1.7]).unwrap();
        for i in 0..=400 {
            let v = Diopter(-2.0 + i as f64 * 0.01);
            let brute = s
                .powers()
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    a.abs_diff(v).partial_cmp(&b.abs_diff(v)).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            assert_eq!(assign_slice(v, &s), brute, "v = {}", v);
        }
    }

    #[test]
    fn depth_filter_on_sample_full_lower() {
        let s = PowerSamples::from_diopter_values(&[0.0, 0.5, 1.0]).unwrap();
        let w = depth_filter(1.0, Diopter(0.5), &s).unwrap();
        assert_eq!(w.lower_index, 1);
        assert_eq!(w.radiance_lower, 1.0);
        assert_eq!(w.radiance_upper, 0.0);
    }

    #[test]
    fn depth_filter_midpoint_splits_evenly() {
        let s = PowerSamples::from_diopter_values(&[0.0, 0.5]).unwrap();
        let w = depth_filter(1.0, Diopter(0.25), &s).unwrap();
        assert_eq!(w.radiance_lower, 0.5);
        assert_eq!(w.radiance_upper, 0.5);
    }

    #[test]
    fn depth_filter_fractional_case() {
        // t = 0.1/0.5 = 0.2, lower = 0.8*0.8 = 0.64, upper = 0.16
        let s = PowerSamples::from_diopter_values(&[0.0, 0.5]).unwrap();
        let w = depth_filter(0.8, Diopter(0.1), &s).unwrap();
        assert_relative_eq!(w.radiance_lower, 0.64, epsilon = 1e-15);
        assert_relative_eq!(w.radiance_upper, 0.16, epsilon = 1e-15);
        assert_eq!(w.radiance_lower + w.radiance_upper, 0.8);
    }

    #[test]
    fn depth_filter_clamps_out_of_range() {
        let s = PowerSamples::from_diopter_values(&[0.0, 0.5, 1.0]).unwrap();
        let w = depth_filter(0.7, Diopter(-3.0), &s).unwrap();
        assert_eq!((w.lower_index, w.radiance_lower, w.radiance_upper), (0, 0.7, 0.0));
        let w = depth_filter(0.7, Diopter(3.0), &s).unwrap();
        assert_eq!((w.lower_index, w.radiance_lower, w.radiance_upper), (1, 0.0, 0.7));
    }

    #[test]
    fn depth_filter_rejects_negative_radiance() {
        let s = PowerSamples::from_diopter_values(&[0.0, 0.5]).unwrap();
        assert!(depth_filter(-0.1, Diopter(0.2), &s).is_err());
    }

    #[test]
    fn depth_filter_conserves_bit_exactly() {
        let s = PowerSamples::from_diopter_values(&[-1.0, -0.4, 0.3, 1.1]).unwrap();
        let mut v: f64 = -1.3;
        let mut r: f64 = 0.013;
        for _ in 0..10_000 {
            // cheap deterministic scramble
            v = (v * 1103.5 + 0.217).rem_euclid(3.0) - 1.4;
            r = (r * 917.3 + 0.071).rem_euclid(1.0);
            let w = depth_filter(r, Diopter(v), &s).unwrap();
            assert_eq!(w.radiance_lower + w.radiance_upper, r, "v={v} r={r}");
            assert!(w.radiance_lower >= 0.0 && w.radiance_upper >= 0.0);
        }
    }

    #[test]
    fn breathing_scale_identity_cases() {
        assert_eq!(breathing_scale(m(0.5), m(0.5), m(0.02)).unwrap(), 1.0);
        assert_eq!(breathing_scale(m(0.7), m(0.2), m(0.0)).unwrap(), 1.0);
    }

    #[test]
    fn breathing_scale_reference_value() {
        // 0.5 * (1/3 + 0.02) / ((1/3) * 0.52)
        let s = breathing_scale(m(0.5), m(1.0 / 3.0), m(0.02)).unwrap();
        let expect = 0.5 * (1.0 / 3.0 + 0.02) / ((1.0 / 3.0) * 0.52);
        assert_relative_eq!(s, expect, epsilon = 1e-15);
        assert!((s - 1.0193).abs() < 1e-4);
    }

    #[test]
    fn breathing_scale_sign_tracks_image_side() {
        // nearer virtual image -> enlargement, farther -> shrink
        assert!(breathing_scale(m(0.5), m(0.4), m(0.02)).unwrap() > 1.0);
        assert!(breathing_scale(m(0.5), m(0.9), m(0.02)).unwrap() < 1.0);
        assert!(breathing_scale(m(0.5), Distance::Infinite, m(0.02)).unwrap() < 1.0);
    }

    #[test]
    fn breathing_scale_infinite_image_limit() {
        let s = breathing_scale(m(0.5), Distance::Infinite, m(0.02)).unwrap();
        assert_relative_eq!(s, 0.5 / 0.52, epsilon = 1e-15);
    }

    #[test]
    fn breathing_scale_rejects_zero_image_distance() {
        assert!(breathing_scale(m(0.5), m(0.0), m(0.02)).is_err());
    }

    #[test]
    fn fov_scale_unit_scale_is_identity() {
        assert_eq!(fov_scale(m(0.1), 1.0, m(0.02), m(0.5)).unwrap(), 1.0);
    }

    #[test]
    fn fov_scale_small_angle_limit() {
        let f = fov_scale(m(1e-9), 1.0193, m(0.02), m(0.5)).unwrap();
        assert_relative_eq!(f, 1.0193, epsilon = 1e-9);
    }

    #[test]
    fn fov_scale_reference_value() {
        let s = 1.0193;
        let f = fov_scale(m(0.1), s, m(0.02), m(0.5)).unwrap();
        let expect = (s * 0.1_f64 / 0.52).atan() / (0.1_f64 / 0.52).atan();
        assert_eq!(f, expect);
        assert!(f > 1.0 && f < s);
    }
}
