//! Phasor model and time-domain simulation of the series-series link.

use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use proptest::prelude::*;
use shewpt::she::{self, HarmonicTargetSet};
use shewpt::transient::{self, Drive, TankState};
use shewpt::waveform::{self, AngleSet};
use shewpt::wpt::{self, WptConfig, WptLinkParams};
use shewpt::Error;

fn bench() -> WptLinkParams {
    WptLinkParams::bench(100.0)
}

fn tuned(params: &WptLinkParams) -> WptLinkParams {
    WptLinkParams {
        f_s: wpt::resonant_frequency(params.l1, params.c1).unwrap(),
        ..params.clone()
    }
}

#[test]
fn closed_form_examples() {
    assert_relative_eq!(
        wpt::mutual_inductance(0.309, 245e-6, 245e-6).unwrap(),
        75.705e-6,
        max_relative = 1e-5
    );
    assert_relative_eq!(
        wpt::mutual_inductance(0.309, 245e-6, 980e-6).unwrap(),
        2.0 * 75.705e-6,
        max_relative = 1e-5
    );
    assert_relative_eq!(
        wpt::mutual_inductance(0.999_999, 1e-3, 1e-3).unwrap(),
        1e-3,
        max_relative = 1e-5
    );
    assert!(wpt::mutual_inductance(1.0, 1e-3, 1e-3).is_err());

    let f0 = wpt::resonant_frequency(245e-6, 14e-9).unwrap();
    assert!((f0 - 85.93e3).abs() < 10.0, "{f0}");
    assert_relative_eq!(
        wpt::resonant_frequency(245e-6, 56e-9).unwrap(),
        f0 / 2.0,
        max_relative = 1e-12
    );
    assert!((wpt::resonant_capacitance(245e-6, 85e3).unwrap() - 14.31e-9).abs() < 0.01e-9);

    assert!((wpt::equivalent_ac_load(50.0).unwrap() - 40.53).abs() < 0.01);
    assert_relative_eq!(
        wpt::equivalent_ac_load(PI * PI / 8.0).unwrap(),
        1.0,
        max_relative = 1e-15
    );
    assert!((wpt::equivalent_ac_load(100.0).unwrap() - 81.06).abs() < 0.01);
    assert!(wpt::equivalent_ac_load(0.0).is_err());

    assert!((wpt::drive_fundamental_rms(100.0) - 90.03).abs() < 0.01);
    assert!((wpt::drive_fundamental_rms(150.0) - 135.05).abs() < 0.01);
    assert_eq!(wpt::drive_fundamental_rms(0.0), 0.0);
}

#[test]
fn fha_bench_power() {
    let p100 = wpt::fha_solve(&bench()).unwrap().p_out;
    let p150 = wpt::fha_solve(&bench().with_v_dc(150.0)).unwrap().p_out;
    assert!((p100 - 201.0).abs() < 0.015 * 201.0, "{p100}");
    assert!((p150 - 452.0).abs() < 0.015 * 452.0, "{p150}");
    assert!((p100 - 215.0).abs() <= 0.15 * 215.0);
    assert!((p150 - 489.0).abs() <= 0.15 * 489.0);

    // At-resonance estimate I2 = V1/(ωM).
    let p = bench();
    let i2 = wpt::drive_fundamental_rms(100.0) / (p.omega() * p.mutual_inductance());
    assert!((i2 * i2 * p.r_ac() - p100).abs() < 0.02 * p100);
}

#[test]
fn fha_power_ratio() {
    assert!((wpt::power_scaling_check(&bench(), 100.0, 150.0).unwrap() - 2.25).abs() < 1e-12);
    assert!((wpt::power_scaling_check(&bench(), 100.0, 100.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((489.0_f64 / 215.0 - 2.25).abs() < 0.015 * 2.25);
}

#[test]
fn fha_uncoupled_delivers_nothing() {
    let sol = wpt::fha_solve(&WptLinkParams { k: 0.0, ..bench() }).unwrap();
    assert_eq!(sol.p_out, 0.0);
    assert_eq!(sol.i2.norm(), 0.0);
}

#[test]
fn fha_resonant_current_source() {
    let base = tuned(&bench());
    let v1 = wpt::drive_fundamental_rms(base.v_dc);
    let want = v1 / (base.omega() * base.mutual_inductance());
    for r in [1.0, 10.0, 50.0, 500.0] {
        let sol = wpt::fha_solve(&WptLinkParams {
            r_load_dc: r,
            ..base.clone()
        })
        .unwrap();
        assert_relative_eq!(sol.i2.norm(), want, max_relative = 1e-9);
    }
}

#[test]
fn fha_phase_at_both_frequencies() {
    let detuned = wpt::fha_solve(&bench()).unwrap();
    assert!(detuned.input_phase_deg().abs() < 1.0);
    assert_eq!(detuned.zvs_favorable, detuned.input_phase_deg() > 0.0);
    let at_f0 = wpt::fha_solve(&tuned(&bench())).unwrap();
    assert!(at_f0.input_phase_deg().abs() < 1e-6);
    assert!((at_f0.p_out - 196.6).abs() < 1.0, "{}", at_f0.p_out);
}

#[test]
fn fha_diode_drop_accounting() {
    let plain = wpt::fha_solve(&bench()).unwrap();
    let with_drop = wpt::fha_solve(&WptLinkParams {
        diode_drop: 1.4,
        ..bench()
    })
    .unwrap();
    assert!(with_drop.p_out < plain.p_out);
    assert!(with_drop.r_eq > plain.r_eq);
    assert_relative_eq!(
        with_drop.p_in,
        with_drop.p_out + with_drop.p_diode,
        max_relative = 1e-9
    );
    let blocked = wpt::fha_solve(&WptLinkParams {
        diode_drop: 1e4,
        ..bench()
    })
    .unwrap();
    assert_eq!(blocked.p_out, 0.0);
}

proptest! {
    #[test]
    fn fha_energy_accounting(
        r1 in 0.0f64..2.0,
        r2 in 0.0f64..2.0,
        r_load in 1.0f64..200.0,
        k in 0.05f64..0.9,
        f_s in 60e3f64..120e3,
    ) {
        let params = WptLinkParams { r1, r2, r_load_dc: r_load, k, f_s, ..bench() };
        let sol = wpt::fha_solve(&params).unwrap();
        let esr = sol.i1.norm_sqr() * r1 + sol.i2.norm_sqr() * r2;
        let scale = sol.p_in.abs().max(1e-300);
        prop_assert!(((sol.p_in - sol.p_out) - esr).abs() <= 1e-10 * scale);
        prop_assert!(sol.p_out >= 0.0 && sol.p_out <= sol.p_in * (1.0 + 1e-12));
        let lossless = wpt::fha_solve(&WptLinkParams { r1: 0.0, r2: 0.0, ..params }).unwrap();
        prop_assert!((lossless.p_in - lossless.p_out).abs() <= 1e-10 * lossless.p_in);
    }

    #[test]
    fn derivative_energy_rate(
        i1 in -5.0f64..5.0, i2 in -5.0f64..5.0, vc1 in -500.0f64..500.0, vc2 in -500.0f64..500.0,
        v in -150.0f64..150.0, r1 in 0.0f64..1.0, r2 in 0.0f64..1.0,
    ) {
        let params = WptLinkParams { r1, r2, ..bench() };
        let r_ac = params.r_ac();
        let s = TankState { i1, i2, v_c1: vc1, v_c2: vc2 };
        let d = transient::derivatives(&s, v, &params, r_ac).unwrap();
        let h = 1e-9;
        let at = |e: f64| {
            let p = TankState { i1: i1 + e * d.i1, i2: i2 + e * d.i2, v_c1: vc1 + e * d.v_c1, v_c2: vc2 + e * d.v_c2 };
            transient::stored_energy(&p, &params)
        };
        let rate = (at(h) - at(-h)) / (2.0 * h);
        let balance = v * i1 - r1 * i1 * i1 - (r2 + r_ac) * i2 * i2;
        let scale = (v * i1).abs() + r1 * i1 * i1 + (r2 + r_ac) * i2 * i2 + (i1 * vc1).abs() + (i2 * vc2).abs();
        prop_assert!((rate - balance).abs() <= 1e-6 * scale.max(1.0), "{} vs {}", rate, balance);
    }
}

#[test]
fn derivative_examples() {
    let params = bench();
    let r_ac = params.r_ac();
    let zero = transient::derivatives(&TankState::default(), 0.0, &params, r_ac).unwrap();
    assert_eq!(zero, TankState::default());

    let s = TankState {
        i1: 1.5,
        i2: -0.5,
        v_c1: 20.0,
        v_c2: 7.0,
    };
    let d = transient::derivatives(
        &s,
        80.0,
        &WptLinkParams {
            k: 0.0,
            r1: 0.3,
            ..params.clone()
        },
        r_ac,
    )
    .unwrap();
    assert_relative_eq!(
        d.i1,
        (80.0 - 20.0 - 0.3 * 1.5) / params.l1,
        max_relative = 1e-12
    );
    assert_relative_eq!(d.i2, (-7.0 - r_ac * -0.5) / params.l2, max_relative = 1e-12);

    let bad = WptLinkParams {
        k: 1.0,
        ..params.clone()
    };
    assert!(matches!(
        transient::derivatives(&s, 0.0, &bad, r_ac),
        Err(Error::Singular(_))
    ));
}

#[test]
fn zero_drive_stays_at_rest() {
    let trace = transient::simulate(&bench(), &Drive::Zero, 512, 4).unwrap();
    assert_eq!(trace.len(), 512 * 4 + 1);
    assert!(trace.states.iter().all(|s| *s == TankState::default()));
    assert_eq!(transient::settle_detector(&trace).unwrap(), Some(1));
}

#[test]
fn simulate_validates_inputs() {
    let p = bench();
    let sq = Drive::Square { v_dc: 100.0 };
    assert!(matches!(
        transient::simulate(&p, &sq, 256, 4),
        Err(Error::Validation { .. })
    ));
    assert!(transient::simulate(&p, &sq, 1000, 4).is_err());
    assert!(transient::simulate(&p, &sq, 512, 0).is_err());
    assert!(transient::simulate(
        &WptLinkParams {
            diode_drop: 0.7,
            ..p.clone()
        },
        &sq,
        512,
        1
    )
    .is_err());
    let wave = waveform::synth(AngleSet::from_degrees(&[20.0]).unwrap(), 10.0, 60e3).unwrap();
    assert!(transient::simulate(&p, &Drive::Stepped(wave), 512, 1).is_err());
    let trace = transient::simulate(&p, &sq, 512, 2).unwrap();
    assert!(transient::steady_state_metrics(&trace, 2).is_err());
    assert!(transient::settle_detector(&trace).is_err());
    assert!(matches!(
        transient::simulate(&p, &Drive::Square { v_dc: 1e12 }, 512, 4),
        Err(Error::Divergence(_))
    ));
}

#[test]
fn uncoupled_secondary_receives_nothing() {
    // Primary tank detuned by a larger capacitor; no coupling.
    let params = WptLinkParams {
        k: 0.0,
        c1: 40e-9,
        r1: 20.0,
        ..bench()
    };
    let trace = transient::simulate(&params, &Drive::Square { v_dc: 100.0 }, 1024, 20).unwrap();
    let m = transient::steady_state_metrics(&trace, 10).unwrap();
    assert_eq!(m.p_out, 0.0);
    assert!(m.p_in > 0.0);
    assert_eq!(m.i2_rms, 0.0);
}

#[test]
fn lossless_energy_is_conserved() {
    let start = TankState {
        i1: 2.0,
        i2: 0.0,
        v_c1: 50.0,
        v_c2: 0.0,
    };
    let decoupled = WptLinkParams { k: 0.0, ..bench() };
    let trace = transient::simulate_from(&decoupled, &Drive::Zero, start, 4096, 10).unwrap();
    let e0 = transient::stored_energy(&trace.states[0], &decoupled);
    let e1 = transient::stored_energy(trace.states.last().unwrap(), &decoupled);
    assert!(((e1 - e0) / e0).abs() < 1e-6, "{:e}", (e1 - e0) / e0);

    // Coupled: stored energy plus energy delivered to the load is invariant.
    let coupled = bench();
    let trace = transient::simulate_from(&coupled, &Drive::Zero, start, 4096, 10).unwrap();
    let e0 = transient::stored_energy(&trace.states[0], &coupled);
    let end = trace.len() - 1;
    let e1 = transient::stored_energy(&trace.states[end], &coupled) + trace.energy_load[end];
    assert!(((e1 - e0) / e0).abs() < 1e-6, "{:e}", (e1 - e0) / e0);
}

#[test]
fn energy_balance_per_cycle() {
    let params = WptLinkParams {
        r1: 0.2,
        r2: 0.1,
        ..bench()
    };
    let trace = transient::simulate(&params, &Drive::Square { v_dc: 100.0 }, 4096, 20).unwrap();
    for c in 0..trace.n_cycles {
        let r = transient::energy_balance_residual(&trace, &params, c).unwrap();
        assert!(r < 1e-6, "cycle {c}: {r:e}");
    }
}

#[test]
fn bench_transient_matches_fha() {
    for v_dc in [100.0, 150.0] {
        let params = bench().with_v_dc(v_dc);
        let fha = wpt::fha_solve(&params).unwrap();
        let trace = transient::simulate(&params, &Drive::Square { v_dc }, 4096, 60).unwrap();
        let m = transient::steady_state_metrics(&trace, 59).unwrap();
        assert!(
            (m.p_out - fha.p_out).abs() < 0.05 * fha.p_out,
            "{} vs {}",
            m.p_out,
            fha.p_out
        );
        assert!((m.i1_fundamental_rms - fha.i1.norm()).abs() < 0.02 * fha.i1.norm());
        assert!((m.p_in - m.p_out).abs() < 1e-3 * m.p_out);
        let settled = transient::settle_detector(&trace)
            .unwrap()
            .expect("settles");
        assert!(settled < 60);
        let band = if v_dc == 100.0 {
            180.0..=250.0
        } else {
            410.0..=560.0
        };
        assert!(band.contains(&m.p_out));
        // Inductive third-harmonic current leaves i1 negative at the rising edges.
        assert!(m.zvs && m.i1_at_rising_edge_max < 0.0);
    }
}

#[test]
fn step_halving_changes_power_little() {
    let params = bench();
    let drive = Drive::Square { v_dc: 100.0 };
    let coarse = transient::simulate(&params, &drive, 4096, 60).unwrap();
    let fine = transient::simulate(&params, &drive, 8192, 60).unwrap();
    let a = transient::steady_state_metrics(&coarse, 59).unwrap().p_out;
    let b = transient::steady_state_metrics(&fine, 59).unwrap().p_out;
    assert!((a - b).abs() < 1e-3 * b, "{a} vs {b}");
}

#[test]
fn fourth_order_convergence() {
    let params = bench();
    let drive = Drive::Square { v_dc: 100.0 };
    let p_out = |spc: usize| {
        let trace = transient::simulate(&params, &drive, spc, 8).unwrap();
        transient::steady_state_metrics(&trace, 7).unwrap().p_out
    };
    let reference = p_out(1 << 15);
    let errors: Vec<f64> = [512, 1024, 2048]
        .iter()
        .map(|&n| (p_out(n) - reference).abs())
        .collect();
    assert!(errors[0] / errors[1] >= 8.0, "{errors:?}");
    assert!(errors[1] / errors[2] >= 8.0, "{errors:?}");
}

#[test]
fn detuned_link_settles() {
    let base = bench();
    let params = WptLinkParams {
        f_s: 0.5 * wpt::resonant_frequency(base.l1, base.c1).unwrap(),
        ..base
    };
    let trace = transient::simulate(&params, &Drive::Square { v_dc: 100.0 }, 1024, 60).unwrap();
    let settled = transient::settle_detector(&trace).unwrap();
    assert!(matches!(settled, Some(c) if c < 60), "{settled:?}");
}

#[test]
fn stepped_drive_tracks_fundamental_fha() {
    let targets = HarmonicTargetSet::new(vec![3, 5, 7]).unwrap();
    let init = AngleSet::from_degrees(&[11.0, 41.0, 85.0]).unwrap();
    let root = she::solve_newton(&init, &targets, 1e-12, 100)
        .unwrap()
        .angle_set;
    let params = bench();
    let step = 40.0;
    let wave = waveform::synth(root.clone(), step, params.f_s).unwrap();
    let trace = transient::simulate(&params, &Drive::Stepped(wave), 4096, 60).unwrap();
    assert!(trace.snapping_error <= 0.5 * TAU / 4096.0);
    let m = transient::steady_state_metrics(&trace, 59).unwrap();
    let v1 = waveform::fundamental_rms(&root, step).unwrap();
    let fha = wpt::fha_solve_with_drive(&params, v1).unwrap();
    assert!(
        (m.p_out - fha.p_out).abs() < 0.05 * fha.p_out,
        "{} vs {}",
        m.p_out,
        fha.p_out
    );
}

#[test]
fn config_round_trip_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("link.json");
    let cfg = WptConfig::from(&bench());
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let params = WptLinkParams::try_from(WptConfig::from_path(&path).unwrap()).unwrap();
    assert_eq!(params, bench());

    let bad = r#"{"L1_H": 245e-6, "C1_F": 14e-9, "k": 0.309, "R_load_ohm": -1, "V_dc_V": 100, "f_s_Hz": 85000}"#;
    std::fs::write(&path, bad).unwrap();
    match WptLinkParams::try_from(WptConfig::from_path(&path).unwrap()) {
        Err(Error::Validation { field, .. }) => assert_eq!(field, "R_load_ohm"),
        other => panic!("{other:?}"),
    }
    std::fs::write(&path, r#"{"L1_H": 1e-3, "extra": 1}"#).unwrap();
    assert!(WptConfig::from_path(&path).is_err());
}
