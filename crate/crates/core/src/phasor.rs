//! Single-frequency phasor arithmetic.
//!
//! Every signal in the model shares one angular frequency, so a wave
//! `A·sin(ωt + φ)` is carried losslessly by its phasor `(A, φ)`. Sums are
//! accumulated on in-phase/quadrature components; ω and t never appear.
//!
//! Amplitudes are in units of the single-input amplitude `A_0 = 1` and
//! powers in units of `P_0`, the time-averaged power of one unit input, so
//! a phasor of amplitude `A` carries power `A²`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhasorError {
    #[error("amplitude must be finite and non-negative, got {0}")]
    BadAmplitude(f64),
    #[error("phase must be finite, got {0}")]
    BadPhase(f64),
    #[error("cannot superpose an empty list of waves")]
    EmptySuperposition,
}

/// Absolute comparison tolerance on normalized quantities.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tolerance(pub f64);

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance(1e-9);

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// A logic value, either an input state or the detector output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Maps any finite angle into `[0, 2π)`.
pub fn canonical_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Shortest angular distance between two phases, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = canonical_phase(a - b);
    d.min(TAU - d)
}

/// A sinusoid `amplitude·sin(ωt + phase)` at the shared frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phasor {
    amplitude: f64,
    phase: f64,
}

impl Phasor {
    pub fn new(amplitude: f64, phase: f64) -> Result<Self, PhasorError> {
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(PhasorError::BadAmplitude(amplitude));
        }
        if !phase.is_finite() {
            return Err(PhasorError::BadPhase(phase));
        }
        Ok(Self {
            amplitude,
            phase: canonical_phase(phase),
        })
    }

    /// Unit-amplitude wave. `phase` must be finite.
    pub fn unit(phase: f64) -> Self {
        debug_assert!(phase.is_finite());
        Self {
            amplitude: 1.0,
            phase: canonical_phase(phase),
        }
    }

    /// Builds a phasor from in-phase (`cos`) and quadrature (`sin`) parts.
    /// A zero vector is given phase 0.
    pub fn from_components(in_phase: f64, quadrature: f64) -> Self {
        let amplitude = in_phase.hypot(quadrature);
        let phase = if amplitude == 0.0 {
            0.0
        } else {
            canonical_phase(quadrature.atan2(in_phase))
        };
        Self { amplitude, phase }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Phase in `[0, 2π)`.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// `(A·cos φ, A·sin φ)`.
    pub fn components(&self) -> (f64, f64) {
        let (s, c) = self.phase.sin_cos();
        (self.amplitude * c, self.amplitude * s)
    }

    /// Same wave delayed by `delta` radians of phase.
    pub fn rotated(&self, delta: f64) -> Self {
        Self {
            amplitude: self.amplitude,
            phase: canonical_phase(self.phase + delta),
        }
    }

    /// Same wave scaled by a non-negative factor.
    pub fn scaled(&self, factor: f64) -> Result<Self, PhasorError> {
        Self::new(self.amplitude * factor, self.phase)
    }
}

/// Time-averaged power in units of `P_0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Power(f64);

impl Power {
    pub fn new(value: f64) -> Result<Self, PhasorError> {
        if !value.is_finite() || value < 0.0 {
            return Err(PhasorError::BadAmplitude(value));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Logic 0 is phase 0, logic 1 is phase π/2.
pub fn wave_from_bit(bit: Bit) -> Phasor {
    match bit {
        Bit::Zero => Phasor::unit(0.0),
        Bit::One => Phasor::unit(FRAC_PI_2),
    }
}

/// An input driven at the midpoint phase π/4 between the two logic phases.
pub fn superposition_state() -> Phasor {
    Phasor::unit(FRAC_PI_4)
}

pub fn power(wave: &Phasor) -> Power {
    Power(wave.amplitude * wave.amplitude)
}

/// Threshold detector: one when `p_out ≥ p_ref` up to `tol`.
pub fn detect(p_out: Power, p_ref: Power, tol: Tolerance) -> Bit {
    Bit::from(p_out.0 >= p_ref.0 - tol.0)
}

/// Interference of a list of waves.
pub fn superpose(waves: &[Phasor]) -> Result<Phasor, PhasorError> {
    if waves.is_empty() {
        return Err(PhasorError::EmptySuperposition);
    }
    let max_amplitude = waves.iter().map(|w| w.amplitude).fold(0.0, f64::max);
    let mut sum = PhasorSum::new(max_amplitude, waves.len());
    for w in waves {
        sum.add(w);
    }
    Ok(sum.value())
}

/// Exact fixed-point accumulator for in-phase/quadrature components.
///
/// Each component is rounded once onto a grid of `2^-scale` and then summed
/// in `i128`, so the result does not depend on the order terms are added.
/// The grid is fixed by the largest amplitude and the number of terms and
/// leaves at least six bits of headroom below `i128::MAX`.
#[derive(Debug, Clone)]
pub struct PhasorSum {
    scale: i32,
    in_phase: i128,
    quadrature: i128,
}

impl PhasorSum {
    /// `max_amplitude` bounds every term that will be added and `count`
    /// bounds how many terms there will be.
    pub fn new(max_amplitude: f64, count: usize) -> Self {
        let magnitude_bits = if max_amplitude > 0.0 && max_amplitude.is_finite() {
            max_amplitude.log2().floor() as i32 + 1
        } else {
            0
        };
        let count_bits = usize::BITS - count.max(1).saturating_sub(1).leading_zeros();
        Self {
            scale: 120 - magnitude_bits - count_bits as i32,
            in_phase: 0,
            quadrature: 0,
        }
    }

    pub fn add(&mut self, wave: &Phasor) {
        let (i, q) = wave.components();
        self.add_components(i, q);
    }

    pub fn add_components(&mut self, in_phase: f64, quadrature: f64) {
        self.add_quantized(self.quantize(in_phase, quadrature));
    }

    /// Grid form of a component pair, for terms that are added many times.
    /// Only valid for sums created with the same bounds.
    pub fn quantize(&self, in_phase: f64, quadrature: f64) -> (i128, i128) {
        (to_grid(in_phase, self.scale), to_grid(quadrature, self.scale))
    }

    pub fn add_quantized(&mut self, (in_phase, quadrature): (i128, i128)) {
        self.in_phase += in_phase;
        self.quadrature += quadrature;
    }

    pub fn components(&self) -> (f64, f64) {
        (
            scale_pow2(self.in_phase as f64, -self.scale),
            scale_pow2(self.quadrature as f64, -self.scale),
        )
    }

    pub fn value(&self) -> Phasor {
        let (i, q) = self.components();
        Phasor::from_components(i, q)
    }
}

fn to_grid(x: f64, scale: i32) -> i128 {
    scale_pow2(x, scale).round() as i128
}

/// `x·2^k` without intermediate overflow for large `|k|`.
fn scale_pow2(mut x: f64, mut k: i32) -> f64 {
    while k != 0 {
        let step = k.clamp(-1000, 1000);
        x *= f64::from_bits(((step + 1023) as u64) << 52);
        k -= step;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bit_encoding() {
        assert_eq!(wave_from_bit(Bit::Zero), Phasor::unit(0.0));
        assert_eq!(wave_from_bit(Bit::One), Phasor::unit(FRAC_PI_2));
        assert_eq!(wave_from_bit(Bit::Zero), wave_from_bit(Bit::Zero));
    }

    #[test]
    fn superposition_state_is_midpoint() {
        let s = superposition_state();
        assert_eq!(s.amplitude(), 1.0);
        assert_eq!(s.phase(), (0.0 + FRAC_PI_2) / 2.0);
    }

    #[test]
    fn zero_plus_one_gives_root_two_at_quarter_pi() {
        let out = superpose(&[Phasor::unit(0.0), Phasor::unit(FRAC_PI_2)]).unwrap();
        assert!((out.amplitude() - 2f64.sqrt()).abs() < 1e-12);
        assert!((out.phase() - FRAC_PI_4).abs() < 1e-12);
        assert!((power(&out).value() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn destructive_and_constructive() {
        for theta in [0.0, 0.3, 1.7, -2.2, 5.9] {
            let out = superpose(&[Phasor::unit(theta), Phasor::unit(theta + PI)]).unwrap();
            assert!(out.amplitude() < 1e-12);
            let n = 7;
            let out = superpose(&vec![Phasor::unit(theta); n]).unwrap();
            assert!((out.amplitude() - n as f64).abs() < 1e-12);
            assert!(circular_distance(out.phase(), theta) < 1e-12);
            assert!((power(&out).value() - 49.0).abs() < 1e-10);
        }
    }

    #[test]
    fn empty_superposition_is_an_error() {
        assert_eq!(superpose(&[]), Err(PhasorError::EmptySuperposition));
    }

    #[test]
    fn detector_threshold() {
        let tol = Tolerance::DEFAULT;
        let p = |v| Power::new(v).unwrap();
        assert_eq!(detect(p(25.0), p(25.0), tol), Bit::One);
        assert_eq!(detect(p(24.999999), p(25.0), tol), Bit::Zero);
        assert_eq!(detect(p(0.0), p(1e-3), tol), Bit::Zero);
        assert_eq!(detect(p(30.0), p(25.0), tol), Bit::One);
    }

    #[test]
    fn unit_power_any_phase() {
        for phi in [0.0, 1.0, 4.0, -3.0] {
            assert_eq!(power(&Phasor::unit(phi)).value(), 1.0);
        }
        let w = Phasor::new(2f64.sqrt(), FRAC_PI_4).unwrap();
        assert!((power(&w).value() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn constructor_rejects_bad_values() {
        assert!(Phasor::new(-1.0, 0.0).is_err());
        assert!(Phasor::new(f64::NAN, 0.0).is_err());
        assert!(Phasor::new(1.0, f64::INFINITY).is_err());
        assert!(Power::new(-0.5).is_err());
    }

    #[test]
    fn phase_is_canonical() {
        let w = Phasor::new(1.0, -FRAC_PI_2).unwrap();
        assert!((w.phase() - 1.5 * PI).abs() < 1e-15);
        assert_eq!(Phasor::new(1.0, TAU).unwrap().phase(), 0.0);
        assert_eq!(canonical_phase(-1e-18), 0.0);
    }

    #[test]
    fn circular_distance_wraps() {
        assert!((circular_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert!((circular_distance(0.0, PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_sum_handles_extreme_magnitudes() {
        let big = superpose(&[Phasor::new(1e200, 0.0).unwrap(), Phasor::new(1e200, 0.0).unwrap()])
            .unwrap();
        assert!((big.amplitude() / 2e200 - 1.0).abs() < 1e-15);
        let tiny = superpose(&[Phasor::new(1e-300, 1.0).unwrap()]).unwrap();
        assert!((tiny.amplitude() / 1e-300 - 1.0).abs() < 1e-12);
        let zero = superpose(&[Phasor::new(0.0, 1.0).unwrap()]).unwrap();
        assert_eq!(zero.amplitude(), 0.0);
    }
}
