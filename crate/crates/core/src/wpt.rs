//! First-harmonic (phasor) model of a series-series compensated
//! inductive link.
//!
//! The bridge is replaced by the fundamental of its square output and the
//! diode rectifier with resistive DC load by the equivalent resistance
//! `8·R/π²`. The two meshes are then
//!
//! ```text
//! (R1 + j(ωL1 − 1/ωC1))·I1 + jωM·I2                  = V1
//! jωM·I1 + (R2 + R_ac + j(ωL2 − 1/ωC2))·I2           = 0
//! ```

use std::f64::consts::{PI, SQRT_2, TAU};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Coil, compensation and load parameters of the link (SI units).
#[derive(Debug, Clone, PartialEq)]
pub struct WptLinkParams {
    pub l1: f64,
    pub l2: f64,
    pub c1: f64,
    pub c2: f64,
    pub k: f64,
    pub r1: f64,
    pub r2: f64,
    pub r_load_dc: f64,
    pub v_dc: f64,
    pub f_s: f64,
    /// Forward drop of the two series-conducting rectifier diodes.
    pub diode_drop: f64,
}

/// On-disk JSON form with unit-suffixed keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WptConfig {
    #[serde(rename = "L1_H")]
    pub l1_h: f64,
    #[serde(rename = "L2_H", default, skip_serializing_if = "Option::is_none")]
    pub l2_h: Option<f64>,
    #[serde(rename = "C1_F")]
    pub c1_f: f64,
    #[serde(rename = "C2_F", default, skip_serializing_if = "Option::is_none")]
    pub c2_f: Option<f64>,
    pub k: f64,
    #[serde(rename = "R_load_ohm")]
    pub r_load_ohm: f64,
    #[serde(rename = "V_dc_V")]
    pub v_dc_v: f64,
    #[serde(rename = "f_s_Hz")]
    pub f_s_hz: f64,
    #[serde(rename = "R1_ohm", default)]
    pub r1_ohm: f64,
    #[serde(rename = "R2_ohm", default)]
    pub r2_ohm: f64,
    #[serde(rename = "diode_drop_V", default)]
    pub diode_drop_v: f64,
}

impl WptConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

impl TryFrom<WptConfig> for WptLinkParams {
    type Error = Error;

    fn try_from(c: WptConfig) -> Result<Self> {
        WptLinkParams {
            l1: c.l1_h,
            l2: c.l2_h.unwrap_or(c.l1_h),
            c1: c.c1_f,
            c2: c.c2_f.unwrap_or(c.c1_f),
            k: c.k,
            r1: c.r1_ohm,
            r2: c.r2_ohm,
            r_load_dc: c.r_load_ohm,
            v_dc: c.v_dc_v,
            f_s: c.f_s_hz,
            diode_drop: c.diode_drop_v,
        }
        .validated()
    }
}

impl From<&WptLinkParams> for WptConfig {
    fn from(p: &WptLinkParams) -> Self {
        WptConfig {
            l1_h: p.l1,
            l2_h: Some(p.l2),
            c1_f: p.c1,
            c2_f: Some(p.c2),
            k: p.k,
            r_load_ohm: p.r_load_dc,
            v_dc_v: p.v_dc,
            f_s_hz: p.f_s,
            r1_ohm: p.r1,
            r2_ohm: p.r2,
            diode_drop_v: p.diode_drop,
        }
    }
}

fn positive(field: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::validation(
            field,
            format!("must be > 0, got {value}"),
        ));
    }
    Ok(())
}

fn non_negative(field: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::validation(
            field,
            format!("must be >= 0, got {value}"),
        ));
    }
    Ok(())
}

fn coupling(k: f64) -> Result<()> {
    if !k.is_finite() || !(0.0..1.0).contains(&k) {
        return Err(Error::validation(
            "k",
            format!("coupling must be in [0, 1), got {k}"),
        ));
    }
    Ok(())
}

impl WptLinkParams {
    /// The bench link: 245 µH coils, 14 nF capacitors, k = 0.309, 50 Ω DC
    /// load, 85 kHz switching.
    pub fn bench(v_dc: f64) -> Self {
        WptLinkParams {
            l1: 245e-6,
            l2: 245e-6,
            c1: 14e-9,
            c2: 14e-9,
            k: 0.309,
            r1: 0.0,
            r2: 0.0,
            r_load_dc: 50.0,
            v_dc,
            f_s: 85e3,
            diode_drop: 0.0,
        }
    }

    /// Checks every field, reporting the first offender by its config key.
    pub fn validated(self) -> Result<Self> {
        positive("L1_H", self.l1)?;
        positive("L2_H", self.l2)?;
        positive("C1_F", self.c1)?;
        positive("C2_F", self.c2)?;
        coupling(self.k)?;
        non_negative("R1_ohm", self.r1)?;
        non_negative("R2_ohm", self.r2)?;
        positive("R_load_ohm", self.r_load_dc)?;
        non_negative("V_dc_V", self.v_dc)?;
        positive("f_s_Hz", self.f_s)?;
        non_negative("diode_drop_V", self.diode_drop)?;
        Ok(self)
    }

    pub fn with_v_dc(&self, v_dc: f64) -> Self {
        WptLinkParams {
            v_dc,
            ..self.clone()
        }
    }

    pub fn mutual_inductance(&self) -> f64 {
        self.k * (self.l1 * self.l2).sqrt()
    }

    pub fn omega(&self) -> f64 {
        TAU * self.f_s
    }

    pub fn r_ac(&self) -> f64 {
        8.0 * self.r_load_dc / (PI * PI)
    }
}

/// `M = k·√(L1·L2)`.
pub fn mutual_inductance(k: f64, l1: f64, l2: f64) -> Result<f64> {
    coupling(k)?;
    positive("L1_H", l1)?;
    positive("L2_H", l2)?;
    Ok(k * (l1 * l2).sqrt())
}

/// `f0 = 1/(2π√(LC))`.
pub fn resonant_frequency(l: f64, c: f64) -> Result<f64> {
    positive("L", l)?;
    positive("C", c)?;
    Ok(1.0 / (TAU * (l * c).sqrt()))
}

/// Capacitance resonating with `l` at `f0`.
pub fn resonant_capacitance(l: f64, f0: f64) -> Result<f64> {
    positive("L", l)?;
    positive("f0", f0)?;
    let w = TAU * f0;
    Ok(1.0 / (w * w * l))
}

/// AC resistance seen by the secondary for a diode bridge feeding `r_load_dc`.
pub fn equivalent_ac_load(r_load_dc: f64) -> Result<f64> {
    positive("R_load_ohm", r_load_dc)?;
    Ok(8.0 * r_load_dc / (PI * PI))
}

/// RMS fundamental of a full-bridge square wave of amplitude `v_dc`.
pub fn drive_fundamental_rms(v_dc: f64) -> f64 {
    4.0 * v_dc / (PI * SQRT_2)
}

fn serialize_phasor<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Phasor {
        re: f64,
        im: f64,
        magnitude: f64,
        phase_deg: f64,
    }
    Phasor {
        re: z.re,
        im: z.im,
        magnitude: z.norm(),
        phase_deg: z.arg().to_degrees(),
    }
    .serialize(s)
}

/// Steady-state phasor solution. Currents and voltages are RMS.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FhaSolution {
    #[serde(rename = "V1_V", serialize_with = "serialize_phasor")]
    pub v1: Complex64,
    #[serde(rename = "I1_A", serialize_with = "serialize_phasor")]
    pub i1: Complex64,
    #[serde(rename = "I2_A", serialize_with = "serialize_phasor")]
    pub i2: Complex64,
    #[serde(rename = "Z_in_ohm", serialize_with = "serialize_phasor")]
    pub z_in: Complex64,
    /// Equivalent AC resistance presented by the rectifier at this operating point.
    #[serde(rename = "R_eq_ohm")]
    pub r_eq: f64,
    #[serde(rename = "I_out_dc_A")]
    pub i_out_dc: f64,
    #[serde(rename = "P_out_W")]
    pub p_out: f64,
    #[serde(rename = "P_in_W")]
    pub p_in: f64,
    #[serde(rename = "P_diode_W")]
    pub p_diode: f64,
    pub zvs_favorable: bool,
}

impl FhaSolution {
    pub fn input_phase_deg(&self) -> f64 {
        self.z_in.arg().to_degrees()
    }
}

/// Solves the two-mesh system for a resistive secondary termination `r_eq`.
fn solve_mesh(params: &WptLinkParams, v1: Complex64, r_eq: f64) -> Result<(Complex64, Complex64)> {
    let w = params.omega();
    let z1 = Complex64::new(params.r1, w * params.l1 - 1.0 / (w * params.c1));
    let z2 = Complex64::new(params.r2 + r_eq, w * params.l2 - 1.0 / (w * params.c2));
    let zm = Complex64::new(0.0, w * params.mutual_inductance());
    let det = z1 * z2 - zm * zm;
    // Magnitudes before the L/C cancellation.
    let scale1 = params.r1 + w * params.l1 + 1.0 / (w * params.c1);
    let scale2 = params.r2 + r_eq + w * params.l2 + 1.0 / (w * params.c2);
    if !(det.norm() > 1e-12 * (scale1 * scale2 + zm.norm_sqr())) {
        return Err(Error::Singular(format!(
            "mesh determinant {det} vanishes at f_s = {} Hz",
            params.f_s
        )));
    }
    Ok((v1 * z2 / det, -zm * v1 / det))
}

/// DC output current implied by a secondary fundamental current `|I2|` (RMS).
fn dc_current(i2_rms: f64) -> f64 {
    2.0 * SQRT_2 / PI * i2_rms
}

/// Rectifier operating point with a diode-pair drop `v_d`: returns the DC
/// current `I_o` solving `I_o = (2√2/π)·|I2(R_eq(I_o))|`, where
/// `R_eq = (8/π²)(R_L + v_d/I_o)`. Zero when the induced voltage cannot
/// forward-bias the bridge.
fn rectifier_current(params: &WptLinkParams, v1: Complex64) -> Result<f64> {
    let v_d = params.diode_drop;
    let r_l = params.r_load_dc;
    let gap = |i_o: f64| -> Result<f64> {
        let r_eq = 8.0 / (PI * PI) * (r_l + v_d / i_o);
        let (_, i2) = solve_mesh(params, v1, r_eq)?;
        Ok(dc_current(i2.norm()) - i_o)
    };
    // Upper bound: without the drop the load can draw no more than this.
    let (_, i2_lin) = solve_mesh(params, v1, params.r_ac())?;
    let mut hi = dc_current(i2_lin.norm()).max(1e-12) * 2.0;
    let mut guard = 0;
    while gap(hi)? > 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Divergence(
                "rectifier current bracket did not close".into(),
            ));
        }
    }
    let mut lo = hi * 1e-15;
    if gap(lo)? <= 0.0 {
        return Ok(0.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Phasor solution driven by the bridge square wave at `params.v_dc`.
pub fn fha_solve(params: &WptLinkParams) -> Result<FhaSolution> {
    fha_solve_with_drive(params, drive_fundamental_rms(params.v_dc))
}

/// Phasor solution for an arbitrary RMS drive fundamental `v1_rms`, taken as
/// the zero-phase reference.
pub fn fha_solve_with_drive(params: &WptLinkParams, v1_rms: f64) -> Result<FhaSolution> {
    let params = params.clone().validated()?;
    let v1 = Complex64::new(v1_rms, 0.0);

    let (r_eq, i_out_dc) = if params.diode_drop > 0.0 {
        let i_o = rectifier_current(&params, v1)?;
        let r_eq = if i_o > 0.0 {
            8.0 / (PI * PI) * (params.r_load_dc + params.diode_drop / i_o)
        } else {
            f64::INFINITY
        };
        (r_eq, i_o)
    } else {
        (params.r_ac(), f64::NAN)
    };

    let (i1, i2) = if r_eq.is_finite() {
        solve_mesh(&params, v1, r_eq)?
    } else {
        // Blocked rectifier: open secondary.
        let w = params.omega();
        let z1 = Complex64::new(params.r1, w * params.l1 - 1.0 / (w * params.c1));
        if !(z1.norm() > 0.0) {
            return Err(Error::Singular("primary mesh impedance vanishes".into()));
        }
        (v1 / z1, Complex64::new(0.0, 0.0))
    };

    let i_out_dc = if i_out_dc.is_nan() {
        dc_current(i2.norm())
    } else {
        i_out_dc
    };
    let (p_out, p_diode) = if params.diode_drop > 0.0 {
        (
            i_out_dc * i_out_dc * params.r_load_dc,
            i_out_dc * params.diode_drop,
        )
    } else {
        (i2.norm_sqr() * r_eq, 0.0)
    };
    let p_in = (v1 * i1.conj()).re;
    let z_in = if i1.norm() > 0.0 {
        v1 / i1
    } else {
        Complex64::new(f64::INFINITY, 0.0)
    };
    Ok(FhaSolution {
        v1,
        i1,
        i2,
        z_in,
        r_eq,
        i_out_dc,
        p_out,
        p_in,
        p_diode,
        zvs_favorable: z_in.arg() > 0.0,
    })
}

/// `P_out(v_dc_b) / P_out(v_dc_a)`.
pub fn power_scaling_check(params: &WptLinkParams, v_dc_a: f64, v_dc_b: f64) -> Result<f64> {
    let a = fha_solve(&params.with_v_dc(v_dc_a))?.p_out;
    let b = fha_solve(&params.with_v_dc(v_dc_b))?.p_out;
    if !(a > 0.0) {
        return Err(Error::validation(
            "V_dc_V",
            "reference operating point delivers no power",
        ));
    }
    Ok(b / a)
}
