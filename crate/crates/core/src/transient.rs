//! Fixed-step time-domain simulation of the series-series tank.
//!
//! State is the two mesh currents and the two capacitor voltages. The
//! rectifier is the linear resistance `R_ac`, so the tank is a linear ODE
//! with a piecewise-constant drive. The drive is constant over every step
//! and its edges sit on step boundaries, so classical RK4 keeps its full
//! order across switching instants.
//!
//! Input, load and ESR energies are integrated as extra RK4 states; the
//! last-cycle powers are their increments over one period.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum;
use crate::waveform::SteppedWaveform;
use crate::wpt::WptLinkParams;

pub const DEFAULT_STEPS_PER_CYCLE: usize = 4096;
pub const MIN_STEPS_PER_CYCLE: usize = 512;
pub const DEFAULT_CYCLES: usize = 60;
/// Relative cycle-to-cycle change in load energy below which a cycle is settled.
pub const SETTLE_TOLERANCE: f64 = 1e-3;
const DIVERGENCE_LIMIT: f64 = 1e9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TankState {
    pub i1: f64,
    pub i2: f64,
    pub v_c1: f64,
    pub v_c2: f64,
}

impl TankState {
    fn max_abs(&self) -> f64 {
        self.i1
            .abs()
            .max(self.i2.abs())
            .max(self.v_c1.abs())
            .max(self.v_c2.abs())
    }
}

/// Energy stored in the coils and capacitors.
pub fn stored_energy(state: &TankState, params: &WptLinkParams) -> f64 {
    let m = params.mutual_inductance();
    0.5 * params.l1 * state.i1 * state.i1
        + 0.5 * params.l2 * state.i2 * state.i2
        + m * state.i1 * state.i2
        + 0.5 * params.c1 * state.v_c1 * state.v_c1
        + 0.5 * params.c2 * state.v_c2 * state.v_c2
}

/// Bridge voltage applied to the primary mesh.
#[derive(Debug, Clone, PartialEq)]
pub enum Drive {
    Zero,
    /// Full-bridge square wave `±v_dc` at `f_s`, rising edge at `t = 0`.
    Square {
        v_dc: f64,
    },
    /// Cascaded multilevel staircase; its frequency must equal `f_s`.
    Stepped(SteppedWaveform),
}

/// Per-step drive voltages over one cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSchedule {
    pub values: Vec<f64>,
    /// Largest distance between a switching angle and its grid-snapped edge, radians.
    pub snapping_error: f64,
}

impl Drive {
    pub fn schedule(&self, steps_per_cycle: usize) -> DriveSchedule {
        let n = steps_per_cycle;
        match self {
            Drive::Zero => DriveSchedule {
                values: vec![0.0; n],
                snapping_error: 0.0,
            },
            Drive::Square { v_dc } => DriveSchedule {
                values: (0..n)
                    .map(|j| if j < n / 2 { *v_dc } else { -*v_dc })
                    .collect(),
                snapping_error: 0.0,
            },
            Drive::Stepped(wave) => {
                let grid = TAU / n as f64;
                let snapped: Vec<usize> = wave
                    .angle_set()
                    .angles()
                    .iter()
                    .map(|theta| (theta / grid).round() as usize)
                    .collect();
                let snapping_error = wave
                    .angle_set()
                    .angles()
                    .iter()
                    .zip(&snapped)
                    .map(|(theta, &s)| (theta - s as f64 * grid).abs())
                    .fold(0.0, f64::max);
                let half = n / 2;
                let values = (0..n)
                    .map(|j| {
                        let level: i32 = snapped
                            .iter()
                            .map(|&s| {
                                if j >= s && j < half - s {
                                    1
                                } else if j >= half + s && j < n - s {
                                    -1
                                } else {
                                    0
                                }
                            })
                            .sum();
                        level as f64 * wave.step_voltage()
                    })
                    .collect();
                DriveSchedule {
                    values,
                    snapping_error,
                }
            }
        }
    }
}

/// Mesh-equation right-hand side, factored once per parameter set.
#[derive(Debug, Clone, Copy)]
struct TankModel {
    l1: f64,
    l2: f64,
    m: f64,
    det: f64,
    r1: f64,
    r2: f64,
    r_ac: f64,
    c1: f64,
    c2: f64,
}

impl TankModel {
    fn new(params: &WptLinkParams, r_ac: f64) -> Result<Self> {
        let m = params.mutual_inductance();
        let det = params.l1 * params.l2 - m * m;
        if !(params.k < 1.0) || !(det > 0.0) {
            return Err(Error::Singular(format!(
                "inductance matrix is singular for k = {}",
                params.k
            )));
        }
        Ok(Self {
            l1: params.l1,
            l2: params.l2,
            m,
            det,
            r1: params.r1,
            r2: params.r2,
            r_ac,
            c1: params.c1,
            c2: params.c2,
        })
    }

    /// `[i1, i2, vC1, vC2, e_in, e_load, e_esr]` derivative.
    fn rhs(&self, x: &[f64; 7], v: f64) -> [f64; 7] {
        let (i1, i2, vc1, vc2) = (x[0], x[1], x[2], x[3]);
        let a = v - vc1 - self.r1 * i1;
        let b = -vc2 - (self.r2 + self.r_ac) * i2;
        [
            (self.l2 * a - self.m * b) / self.det,
            (self.l1 * b - self.m * a) / self.det,
            i1 / self.c1,
            i2 / self.c2,
            v * i1,
            self.r_ac * i2 * i2,
            self.r1 * i1 * i1 + self.r2 * i2 * i2,
        ]
    }

    fn rk4(&self, x: &[f64; 7], v: f64, h: f64) -> [f64; 7] {
        let add = |x: &[f64; 7], k: &[f64; 7], s: f64| std::array::from_fn(|i| x[i] + s * k[i]);
        let k1 = self.rhs(x, v);
        let k2 = self.rhs(&add(x, &k1, 0.5 * h), v);
        let k3 = self.rhs(&add(x, &k2, 0.5 * h), v);
        let k4 = self.rhs(&add(x, &k3, h), v);
        std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
    }
}

/// Time derivative of the tank state for drive voltage `v_drive` and load `r_ac`.
pub fn derivatives(
    state: &TankState,
    v_drive: f64,
    params: &WptLinkParams,
    r_ac: f64,
) -> Result<TankState> {
    let model = TankModel::new(params, r_ac)?;
    let d = model.rhs(
        &[state.i1, state.i2, state.v_c1, state.v_c2, 0.0, 0.0, 0.0],
        v_drive,
    );
    Ok(TankState {
        i1: d[0],
        i2: d[1],
        v_c1: d[2],
        v_c2: d[3],
    })
}

/// Uniformly sampled simulation output, `steps_per_cycle * n_cycles + 1` points.
#[derive(Debug, Clone)]
pub struct TransientTrace {
    pub dt: f64,
    pub steps_per_cycle: usize,
    pub n_cycles: usize,
    pub states: Vec<TankState>,
    /// Drive level of the step starting at each sample.
    pub drive: Vec<f64>,
    /// Cumulative `∫ v_drive·i1 dt`.
    pub energy_in: Vec<f64>,
    /// Cumulative `∫ R_ac·i2² dt`.
    pub energy_load: Vec<f64>,
    /// Cumulative `∫ (R1·i1² + R2·i2²) dt`.
    pub energy_esr: Vec<f64>,
    pub r_ac: f64,
    pub snapping_error: f64,
}

impl TransientTrace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.dt * self.steps_per_cycle as f64
    }

    pub fn time(&self, index: usize) -> f64 {
        self.dt * index as f64
    }

    /// Load energy delivered during each whole cycle.
    pub fn cycle_load_energy(&self) -> Vec<f64> {
        let n = self.steps_per_cycle;
        (0..self.n_cycles)
            .map(|c| self.energy_load[(c + 1) * n] - self.energy_load[c * n])
            .collect()
    }
}

fn check_grid(steps_per_cycle: usize, n_cycles: usize) -> Result<()> {
    if steps_per_cycle < MIN_STEPS_PER_CYCLE || !steps_per_cycle.is_power_of_two() {
        return Err(Error::validation(
            "steps_per_cycle",
            format!("must be a power of two >= {MIN_STEPS_PER_CYCLE}, got {steps_per_cycle}"),
        ));
    }
    if n_cycles < 1 {
        return Err(Error::validation(
            "n_cycles",
            "at least one cycle is required",
        ));
    }
    Ok(())
}

/// Simulates from rest.
pub fn simulate(
    params: &WptLinkParams,
    drive: &Drive,
    steps_per_cycle: usize,
    n_cycles: usize,
) -> Result<TransientTrace> {
    simulate_from(
        params,
        drive,
        TankState::default(),
        steps_per_cycle,
        n_cycles,
    )
}

pub fn simulate_from(
    params: &WptLinkParams,
    drive: &Drive,
    initial: TankState,
    steps_per_cycle: usize,
    n_cycles: usize,
) -> Result<TransientTrace> {
    let params = params.clone().validated()?;
    check_grid(steps_per_cycle, n_cycles)?;
    if params.diode_drop > 0.0 {
        return Err(Error::validation(
            "diode_drop_V",
            "the time-domain model uses the linear equivalent load; set the diode drop to 0",
        ));
    }
    if let Drive::Stepped(wave) = drive {
        let rel = (wave.fundamental_frequency() - params.f_s).abs() / params.f_s;
        if rel > 1e-9 {
            return Err(Error::validation(
                "drive",
                format!(
                    "waveform frequency {} Hz differs from f_s = {} Hz",
                    wave.fundamental_frequency(),
                    params.f_s
                ),
            ));
        }
    }
    if let Drive::Square { v_dc } = drive {
        if !v_dc.is_finite() {
            return Err(Error::validation(
                "V_dc_V",
                "drive amplitude must be finite",
            ));
        }
    }

    let r_ac = params.r_ac();
    let model = TankModel::new(&params, r_ac)?;
    let schedule = drive.schedule(steps_per_cycle);
    let dt = 1.0 / (params.f_s * steps_per_cycle as f64);
    let total = steps_per_cycle * n_cycles;

    let mut states = Vec::with_capacity(total + 1);
    let mut drive_samples = Vec::with_capacity(total + 1);
    let mut energy_in = Vec::with_capacity(total + 1);
    let mut energy_load = Vec::with_capacity(total + 1);
    let mut energy_esr = Vec::with_capacity(total + 1);

    let mut x = [
        initial.i1,
        initial.i2,
        initial.v_c1,
        initial.v_c2,
        0.0,
        0.0,
        0.0,
    ];
    for step in 0..=total {
        let state = TankState {
            i1: x[0],
            i2: x[1],
            v_c1: x[2],
            v_c2: x[3],
        };
        if !(state.max_abs() <= DIVERGENCE_LIMIT) {
            return Err(Error::Divergence(format!(
                "state magnitude exceeded {DIVERGENCE_LIMIT:e} at step {step}"
            )));
        }
        let v = schedule.values[step % steps_per_cycle];
        states.push(state);
        drive_samples.push(v);
        energy_in.push(x[4]);
        energy_load.push(x[5]);
        energy_esr.push(x[6]);
        if step < total {
            x = model.rk4(&x, v, dt);
        }
    }

    Ok(TransientTrace {
        dt,
        steps_per_cycle,
        n_cycles,
        states,
        drive: drive_samples,
        energy_in,
        energy_load,
        energy_esr,
        r_ac,
        snapping_error: schedule.snapping_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyStateMetrics {
    #[serde(rename = "I1_rms_A")]
    pub i1_rms: f64,
    #[serde(rename = "I2_rms_A")]
    pub i2_rms: f64,
    /// RMS of the fundamental component of `i1`.
    #[serde(rename = "I1_fundamental_rms_A")]
    pub i1_fundamental_rms: f64,
    /// Mean `R_ac·i2²` over the last cycle.
    #[serde(rename = "P_out_W")]
    pub p_out: f64,
    /// Mean `v_drive·i1` over the last cycle.
    #[serde(rename = "P_in_W")]
    pub p_in: f64,
    /// `i1` at every rising drive edge of the last cycle is negative.
    pub zvs: bool,
    /// Largest `i1` seen at a rising edge; negative means ZVS.
    #[serde(rename = "i1_at_rising_edge_max_A")]
    pub i1_at_rising_edge_max: f64,
}

/// Metrics over the final cycle of `trace`.
///
/// The ZVS check reads `i1` at the sample on each rising edge, i.e. the last
/// state computed under the lower drive level.
pub fn steady_state_metrics(
    trace: &TransientTrace,
    settle_cycles: usize,
) -> Result<SteadyStateMetrics> {
    if trace.n_cycles < settle_cycles + 1 {
        return Err(Error::validation(
            "settle_cycles",
            format!(
                "trace has {} cycles, needs at least {}",
                trace.n_cycles,
                settle_cycles + 1
            ),
        ));
    }
    let n = trace.steps_per_cycle;
    let end = trace.len() - 1;
    let start = end - n;
    let period = trace.period();
    let window = &trace.states[start..end];

    let rms = |f: fn(&TankState) -> f64| {
        (window.iter().map(|s| f(s).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let i1_samples: Vec<f64> = window.iter().map(|s| s.i1).collect();
    let i1_fundamental_rms =
        spectrum::dft_spectrum(&i1_samples, 1.0 / period, 1)?.fundamental() / 2f64.sqrt();

    let edges: Vec<f64> = (start + 1..=end)
        .filter(|&j| trace.drive[j] > trace.drive[j - 1])
        .map(|j| trace.states[j].i1)
        .collect();
    let i1_at_rising_edge_max = edges.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    Ok(SteadyStateMetrics {
        i1_rms: rms(|s| s.i1),
        i2_rms: rms(|s| s.i2),
        i1_fundamental_rms,
        p_out: (trace.energy_load[end] - trace.energy_load[start]) / period,
        p_in: (trace.energy_in[end] - trace.energy_in[start]) / period,
        zvs: !edges.is_empty() && i1_at_rising_edge_max < 0.0,
        i1_at_rising_edge_max,
    })
}

/// First cycle from which every cycle's load energy differs from the
/// previous cycle's by less than 0.1%; `None` if the trace never settles.
pub fn settle_detector(trace: &TransientTrace) -> Result<Option<usize>> {
    if trace.n_cycles < 3 {
        return Err(Error::validation(
            "n_cycles",
            "settle detection needs at least 3 cycles",
        ));
    }
    let energy = trace.cycle_load_energy();
    let settled = |c: usize| {
        let (prev, cur) = (energy[c - 1], energy[c]);
        let scale = prev.abs().max(cur.abs());
        (cur - prev).abs() <= SETTLE_TOLERANCE * scale
    };
    let mut first = None;
    for c in (1..energy.len()).rev() {
        if settled(c) {
            first = Some(c);
        } else {
            break;
        }
    }
    Ok(first)
}

/// Relative energy-balance residual over `cycle`:
/// `|ΔE − ∫(v·i1 − R1·i1² − (R2+R_ac)·i2²) dt|`, the integral by the
/// trapezoid rule on the trace samples, divided by the energy throughput
/// `∫|v·i1| + ∫ dissipation` (or by the peak stored energy when nothing flows).
pub fn energy_balance_residual(
    trace: &TransientTrace,
    params: &WptLinkParams,
    cycle: usize,
) -> Result<f64> {
    if cycle >= trace.n_cycles {
        return Err(Error::validation(
            "cycle",
            format!("trace has {} cycles", trace.n_cycles),
        ));
    }
    let n = trace.steps_per_cycle;
    let (start, end) = (cycle * n, (cycle + 1) * n);
    let h = trace.dt;
    let r_load = params.r2 + trace.r_ac;
    let mut net = 0.0;
    let mut throughput = 0.0;
    for j in start..end {
        let (a, b) = (&trace.states[j], &trace.states[j + 1]);
        // Drive is constant over the step.
        let v = trace.drive[j];
        let p_in = v * 0.5 * (a.i1 + b.i1);
        let p_loss =
            0.5 * (params.r1 * (a.i1 * a.i1 + b.i1 * b.i1) + r_load * (a.i2 * a.i2 + b.i2 * b.i2));
        net += h * (p_in - p_loss);
        throughput += h * (p_in.abs() + p_loss);
    }
    let delta =
        stored_energy(&trace.states[end], params) - stored_energy(&trace.states[start], params);
    let scale = if throughput > 0.0 {
        throughput
    } else {
        trace.states[start..=end]
            .iter()
            .map(|s| stored_energy(s, params))
            .fold(0.0, f64::max)
    };
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((delta - net).abs() / scale)
}
