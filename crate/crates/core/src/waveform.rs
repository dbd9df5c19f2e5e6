//! Stepped output voltage of an N-cell cascaded H-bridge.
//!
//! Each cell switches at a single firing angle per quarter period, so the
//! summed output is a quarter-wave-symmetric staircase with levels
//! `k * step_voltage`, `k` in `[-N, N]`. All angles are radians here;
//! conversion to degrees happens at the CLI boundary.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered firing angles of an N-cell cascade.
///
/// Invariant: non-empty, strictly increasing, every angle in `(0, π/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AngleSet {
    angles: Vec<f64>,
}

impl AngleSet {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::validation(
                "angles",
                "at least one firing angle is required",
            ));
        }
        for (i, &a) in angles.iter().enumerate() {
            if !a.is_finite() || a <= 0.0 || a >= FRAC_PI_2 {
                return Err(Error::validation(
                    "angles",
                    format!(
                        "angle {} = {:.6}° is outside (0°, 90°)",
                        i + 1,
                        a.to_degrees()
                    ),
                ));
            }
        }
        if let Some(i) = angles.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                "angles",
                format!(
                    "angles must be strictly increasing (angle {} <= angle {})",
                    i + 2,
                    i + 1
                ),
            ));
        }
        Ok(Self { angles })
    }

    pub fn from_degrees(degrees: &[f64]) -> Result<Self> {
        Self::new(degrees.iter().map(|d| d.to_radians()).collect())
    }

    /// Number of cascaded cells.
    pub fn levels(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn to_degrees(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.to_degrees()).collect()
    }

    /// Largest per-angle distance to `other`, in radians. `None` when the
    /// level counts differ.
    pub fn max_distance(&self, other: &AngleSet) -> Option<f64> {
        if self.levels() != other.levels() {
            return None;
        }
        Some(
            self.angles
                .iter()
                .zip(&other.angles)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

impl TryFrom<Vec<f64>> for AngleSet {
    type Error = Error;

    fn try_from(angles: Vec<f64>) -> Result<Self> {
        Self::new(angles)
    }
}

impl From<AngleSet> for Vec<f64> {
    fn from(set: AngleSet) -> Self {
        set.angles
    }
}

/// Conduction windows of one cell over a period, in electrical radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerWindow {
    /// `[θ, π − θ]`, cell outputs `+step_voltage`.
    pub positive: (f64, f64),
    /// `[π + θ, 2π − θ]`, cell outputs `−step_voltage`.
    pub negative: (f64, f64),
}

impl LayerWindow {
    fn from_angle(theta: f64) -> Self {
        Self {
            positive: (theta, PI - theta),
            negative: (PI + theta, TAU - theta),
        }
    }

    /// Cell output sign at `phase` in `[0, 2π)`: `+1`, `-1` or `0`.
    pub fn sign_at(&self, phase: f64) -> i32 {
        if phase >= self.positive.0 && phase <= self.positive.1 {
            1
        } else if phase >= self.negative.0 && phase <= self.negative.1 {
            -1
        } else {
            0
        }
    }

    /// Signed length of `[a, b] ⊂ [0, 2π]` spent in the conduction windows.
    fn signed_overlap(&self, a: f64, b: f64) -> f64 {
        overlap(a, b, self.positive) - overlap(a, b, self.negative)
    }
}

fn overlap(a: f64, b: f64, window: (f64, f64)) -> f64 {
    (b.min(window.1) - a.max(window.0)).max(0.0)
}

/// Per-cell switching pattern of the cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct GatePattern {
    pub layers: Vec<LayerWindow>,
    pub step_voltage: f64,
}

impl GatePattern {
    /// Output voltage of cell `layer` at `phase` (any real, wrapped to one period).
    pub fn layer_output(&self, layer: usize, phase: f64) -> f64 {
        let phase = phase.rem_euclid(TAU);
        self.layers[layer].sign_at(phase) as f64 * self.step_voltage
    }
}

/// Periodic staircase produced by a cascade with equal per-cell DC links.
#[derive(Debug, Clone, PartialEq)]
pub struct SteppedWaveform {
    angle_set: AngleSet,
    step_voltage: f64,
    fundamental_frequency: f64,
    windows: Vec<LayerWindow>,
}

/// Builds the stepped waveform for `angle_set` with `step_voltage` volts per cell.
pub fn synth(angle_set: AngleSet, step_voltage: f64, f1: f64) -> Result<SteppedWaveform> {
    SteppedWaveform::new(angle_set, step_voltage, f1)
}

impl SteppedWaveform {
    pub fn new(angle_set: AngleSet, step_voltage: f64, fundamental_frequency: f64) -> Result<Self> {
        check_step(step_voltage)?;
        if !fundamental_frequency.is_finite() || fundamental_frequency <= 0.0 {
            return Err(Error::validation(
                "fundamental_frequency",
                format!("must be a positive frequency, got {fundamental_frequency}"),
            ));
        }
        let windows = angle_set
            .angles()
            .iter()
            .map(|&theta| LayerWindow::from_angle(theta))
            .collect();
        Ok(Self {
            angle_set,
            step_voltage,
            fundamental_frequency,
            windows,
        })
    }

    pub fn angle_set(&self) -> &AngleSet {
        &self.angle_set
    }

    pub fn step_voltage(&self) -> f64 {
        self.step_voltage
    }

    pub fn fundamental_frequency(&self) -> f64 {
        self.fundamental_frequency
    }

    pub fn period(&self) -> f64 {
        1.0 / self.fundamental_frequency
    }

    pub fn peak(&self) -> f64 {
        self.angle_set.levels() as f64 * self.step_voltage
    }

    pub fn gate_pattern(&self) -> GatePattern {
        GatePattern {
            layers: self.windows.clone(),
            step_voltage: self.step_voltage,
        }
    }

    /// Integer level `k` at electrical angle `phase`; the output is `k * step_voltage`.
    pub fn level_at_phase(&self, phase: f64) -> i32 {
        let phase = phase.rem_euclid(TAU);
        self.windows.iter().map(|w| w.sign_at(phase)).sum()
    }

    pub fn value_at_phase(&self, phase: f64) -> f64 {
        self.level_at_phase(phase) as f64 * self.step_voltage
    }

    /// Exact instantaneous value at time `t` seconds.
    pub fn sample(&self, t: f64) -> f64 {
        self.value_at_phase(TAU * self.fundamental_frequency * t)
    }

    /// Mean value over the phase interval `[a, b]`, computed from the exact
    /// segment overlaps. Requires `a < b <= a + 2π`.
    pub fn mean_over_phase(&self, a: f64, b: f64) -> f64 {
        debug_assert!(b > a && b - a <= TAU + 1e-12);
        let shift = (a / TAU).floor() * TAU;
        let (a, b) = (a - shift, b - shift);
        let mut integral = self.integral_within_period(a, b.min(TAU));
        if b > TAU {
            integral += self.integral_within_period(0.0, b - TAU);
        }
        integral / (b - a)
    }

    fn integral_within_period(&self, a: f64, b: f64) -> f64 {
        self.windows
            .iter()
            .map(|w| w.signed_overlap(a, b))
            .sum::<f64>()
            * self.step_voltage
    }

    /// `n` point samples over one period starting at `t = 0`.
    pub fn sample_period(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| self.value_at_phase(TAU * j as f64 / n as f64))
            .collect()
    }

    /// `n` cell-averaged samples over one period: sample `j` is the exact mean
    /// of the waveform over the cell of width `T/n` centred on `t_j = jT/n`.
    ///
    /// Unlike point samples, these keep the switching edges' sub-sample
    /// position, so a DFT of them tracks the analytic Fourier series closely.
    pub fn sample_period_averaged(&self, n: usize) -> Vec<f64> {
        let width = TAU / n as f64;
        (0..n)
            .map(|j| {
                let centre = width * j as f64;
                self.mean_over_phase(centre - 0.5 * width, centre + 0.5 * width)
            })
            .collect()
    }

    /// Sample instants matching [`sample_period`](Self::sample_period).
    pub fn sample_times(&self, n: usize) -> Vec<f64> {
        let period = self.period();
        (0..n).map(|j| period * j as f64 / n as f64).collect()
    }
}

fn check_step(step_voltage: f64) -> Result<()> {
    if !step_voltage.is_finite() || step_voltage <= 0.0 {
        return Err(Error::validation(
            "step_voltage",
            format!("must be a positive voltage, got {step_voltage}"),
        ));
    }
    Ok(())
}

/// Peak amplitude of the `n`-th sine harmonic,
/// `b_n = 4·V_step/(nπ) · Σ_i cos(n·θ_i)` for odd `n`, zero for even `n`.
pub fn harmonic_amplitude(angle_set: &AngleSet, step_voltage: f64, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::validation("n", "harmonic order must be >= 1"));
    }
    check_step(step_voltage)?;
    if n.is_multiple_of(2) {
        return Ok(0.0);
    }
    let order = n as f64;
    let cos_sum: f64 = angle_set.angles().iter().map(|t| (order * t).cos()).sum();
    Ok(4.0 * step_voltage / (order * PI) * cos_sum)
}

pub fn fundamental_rms(angle_set: &AngleSet, step_voltage: f64) -> Result<f64> {
    Ok(harmonic_amplitude(angle_set, step_voltage, 1)? / 2f64.sqrt())
}

/// Time-domain RMS from the quarter-period staircase:
/// `V² = (2/π) Σ_k (k·V_step)² · (θ_{k+1} − θ_k)`, with `θ_{N+1} = π/2`.
pub fn total_rms(angle_set: &AngleSet, step_voltage: f64) -> Result<f64> {
    check_step(step_voltage)?;
    let angles = angle_set.angles();
    let mean_square: f64 = angles
        .iter()
        .enumerate()
        .map(|(i, &start)| {
            let end = angles.get(i + 1).copied().unwrap_or(FRAC_PI_2);
            let level = (i + 1) as f64 * step_voltage;
            level * level * (end - start)
        })
        .sum::<f64>()
        * 2.0
        / PI;
    Ok(mean_square.sqrt())
}
