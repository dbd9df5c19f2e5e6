//! CSV, JSON and SVG writers. Output is a pure function of the data so
//! repeated runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::spectrum::HarmonicSpectrum;
use crate::transient::TransientTrace;

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// `t_s,v_V`, one row per sample.
pub fn write_waveform_csv(path: &Path, times: &[f64], values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t_s", "v_V"])?;
    for (t, v) in times.iter().zip(values) {
        w.serialize((t, v))?;
    }
    w.flush()?;
    Ok(())
}

/// `theta_index,theta_deg` with 1-based indices.
pub fn write_solution_csv(path: &Path, angles_deg: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["theta_index", "theta_deg"])?;
    for (i, a) in angles_deg.iter().enumerate() {
        w.serialize((i + 1, a))?;
    }
    w.flush()?;
    Ok(())
}

/// `n,f_Hz,amp_V,rel_to_fund`.
pub fn write_spectrum_csv(path: &Path, spectrum: &HarmonicSpectrum) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "f_Hz", "amp_V", "rel_to_fund"])?;
    let fund = spectrum.fundamental();
    for (i, amp) in spectrum.amplitudes.iter().enumerate() {
        let n = i + 1;
        let rel = if fund > 0.0 { amp / fund } else { f64::NAN };
        w.serialize((n, n as f64 * spectrum.fundamental_frequency, amp, rel))?;
    }
    w.flush()?;
    Ok(())
}

/// `t_s,v_drive_V,i1_A,i2_A,vC1_V,vC2_V` for samples `from..`.
pub fn write_trace_csv(path: &Path, trace: &TransientTrace, from: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t_s", "v_drive_V", "i1_A", "i2_A", "vC1_V", "vC2_V"])?;
    for j in from.min(trace.len())..trace.len() {
        let s = &trace.states[j];
        w.serialize((trace.time(j), trace.drive[j], s.i1, s.i2, s.v_c1, s.v_c2))?;
    }
    w.flush()?;
    Ok(())
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Staircase plot of one period as a step polyline.
pub fn waveform_svg(times: &[f64], values: &[f64], title: &str) -> String {
    let mut s = svg_open(title);
    let t_max = times.last().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    let v_max = values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let x = |t: f64| MARGIN + (WIDTH - 2.0 * MARGIN) * t / t_max;
    let y = |v: f64| HEIGHT / 2.0 - (HEIGHT / 2.0 - MARGIN) * v / v_max;
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="gray"/>"#,
        HEIGHT / 2.0,
        WIDTH - MARGIN
    );
    let mut points = String::new();
    for (i, (&t, &v)) in times.iter().zip(values).enumerate() {
        if i > 0 {
            let _ = write!(points, "{:.2},{:.2} ", x(t), y(values[i - 1]));
        }
        let _ = write!(points, "{:.2},{:.2} ", x(t), y(v));
    }
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
        points.trim_end()
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{:.2}" font-family="sans-serif" font-size="11">{:.1} V</text>"#,
        MARGIN - 4.0,
        v_max
    );
    s.push_str("</svg>\n");
    s
}

/// Bar chart of amplitudes relative to the fundamental.
pub fn spectrum_svg(spectrum: &HarmonicSpectrum, title: &str) -> String {
    let mut s = svg_open(title);
    let fund = spectrum.fundamental();
    let n = spectrum.n_max().max(1) as f64;
    let slot = (WIDTH - 2.0 * MARGIN) / n;
    let base = HEIGHT - MARGIN;
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{base}" x2="{}" y2="{base}" stroke="gray"/>"#,
        WIDTH - MARGIN
    );
    for (i, amp) in spectrum.amplitudes.iter().enumerate() {
        let rel = if fund > 0.0 {
            (amp / fund).min(1.0)
        } else {
            0.0
        };
        let h = rel * (HEIGHT - 2.0 * MARGIN - 10.0);
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="darkorange"><title>n={} {:.4}%</title></rect>"#,
            MARGIN + slot * i as f64 + 0.1 * slot,
            base - h,
            0.8 * slot,
            h,
            i + 1,
            100.0 * rel
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}
