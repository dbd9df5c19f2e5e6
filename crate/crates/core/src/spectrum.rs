//! Harmonic spectra and THD of periodic waveforms.
//!
//! The DFT path takes exactly one period of uniformly spaced samples, so bin
//! `n` is harmonic `n` with no window and no leakage. THD uses the amplitude
//! ratio convention: `√(Σ_{n=2}^{n_max} A_n²) / A_1`.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::{self, AngleSet, SteppedWaveform};

pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 1 << 13;
/// Harmonic band of the short-band THD figure.
pub const THD_BAND_SHORT: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumSource {
    Analytic,
    Dft,
}

/// Peak amplitudes by harmonic order, `amplitudes[n - 1]` for order `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSpectrum {
    pub fundamental_frequency: f64,
    pub amplitudes: Vec<f64>,
    pub source: SpectrumSource,
}

impl HarmonicSpectrum {
    pub fn n_max(&self) -> usize {
        self.amplitudes.len()
    }

    /// Peak amplitude of order `n >= 1`.
    pub fn amplitude(&self, n: usize) -> Option<f64> {
        n.checked_sub(1)
            .and_then(|i| self.amplitudes.get(i).copied())
    }

    pub fn fundamental(&self) -> f64 {
        self.amplitudes.first().copied().unwrap_or(0.0)
    }
}

/// Sine and cosine Fourier coefficients of one harmonic:
/// `v(t) ⊃ sine·sin(nωt) + cosine·cos(nωt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierPair {
    pub sine: f64,
    pub cosine: f64,
}

impl FourierPair {
    pub fn magnitude(&self) -> f64 {
        self.sine.hypot(self.cosine)
    }
}

fn check_samples(len: usize, n_max: usize) -> Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::validation(
            "samples",
            format!("sample count {len} is not a power of two"),
        ));
    }
    if n_max == 0 {
        return Err(Error::validation("n_max", "must be at least 1"));
    }
    if len < 2 * n_max + 2 {
        return Err(Error::validation(
            "n_max",
            format!(
                "{n_max} harmonics need at least {} samples, got {len}",
                2 * n_max + 2
            ),
        ));
    }
    Ok(())
}

fn forward_fft(samples: &[f64]) -> Vec<Complex<f64>> {
    let fft: Arc<dyn rustfft::Fft<f64>> = FftPlanner::new().plan_fft_forward(samples.len());
    let mut buffer: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fft.process(&mut buffer);
    buffer
}

/// Fourier coefficients for orders `1..=n_max` of one sampled period.
pub fn dft_coefficients(samples: &[f64], n_max: usize) -> Result<Vec<FourierPair>> {
    check_samples(samples.len(), n_max)?;
    let bins = forward_fft(samples);
    let scale = 2.0 / samples.len() as f64;
    Ok(bins[1..=n_max]
        .iter()
        .map(|c| FourierPair {
            sine: -c.im * scale,
            cosine: c.re * scale,
        })
        .collect())
}

/// Spectrum of one exact period of uniformly sampled data.
pub fn dft_spectrum(samples: &[f64], f1: f64, n_max: usize) -> Result<HarmonicSpectrum> {
    Ok(HarmonicSpectrum {
        fundamental_frequency: f1,
        amplitudes: dft_coefficients(samples, n_max)?
            .iter()
            .map(FourierPair::magnitude)
            .collect(),
        source: SpectrumSource::Dft,
    })
}

/// Spectrum of a stepped waveform from its cell-averaged samples.
pub fn waveform_dft_spectrum(
    wave: &SteppedWaveform,
    samples_per_period: usize,
    n_max: usize,
) -> Result<HarmonicSpectrum> {
    check_samples(samples_per_period, n_max)?;
    dft_spectrum(
        &wave.sample_period_averaged(samples_per_period),
        wave.fundamental_frequency(),
        n_max,
    )
}

/// Closed-form spectrum `|b_n|` for orders `1..=n_max`.
pub fn analytic_spectrum(wave: &SteppedWaveform, n_max: usize) -> Result<HarmonicSpectrum> {
    let amplitudes = (1..=n_max as u32)
        .map(|n| {
            waveform::harmonic_amplitude(wave.angle_set(), wave.step_voltage(), n).map(f64::abs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HarmonicSpectrum {
        fundamental_frequency: wave.fundamental_frequency(),
        amplitudes,
        source: SpectrumSource::Analytic,
    })
}

/// `√(Σ_{n=2}^{n_max} A_n²) / A_1`.
pub fn thd(spectrum: &HarmonicSpectrum, n_max: usize) -> Result<f64> {
    if n_max > spectrum.n_max() {
        return Err(Error::validation(
            "n_max",
            format!("spectrum only covers {} harmonics", spectrum.n_max()),
        ));
    }
    let fundamental = spectrum.fundamental();
    if !(fundamental > 0.0) {
        return Err(Error::UndefinedThd);
    }
    let distortion: f64 = spectrum.amplitudes[1..n_max.max(1)]
        .iter()
        .map(|a| a * a)
        .sum();
    Ok(distortion.sqrt() / fundamental)
}

/// Untruncated THD from Parseval: `√(V_rms² / V_1,rms² − 1)`.
pub fn thd_total_closed_form(angle_set: &AngleSet, step_voltage: f64) -> Result<f64> {
    let total = waveform::total_rms(angle_set, step_voltage)?;
    let fundamental = waveform::fundamental_rms(angle_set, step_voltage)?;
    if !(fundamental.abs() > 0.0) {
        return Err(Error::UndefinedThd);
    }
    let ratio = (total / fundamental).powi(2) - 1.0;
    Ok(ratio.max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThdReport {
    /// Untruncated THD from the closed form.
    pub thd_total: f64,
    /// DFT THD over harmonics `2..=band_total`, reported alongside.
    pub thd_total_dft: f64,
    pub band_total: usize,
    /// DFT THD over harmonics `2..=21`.
    pub thd_21: f64,
    /// Largest `A_n / A_1` over the eliminated orders (DFT).
    pub eliminated_orders_max_relative: f64,
}

/// THD figures of `wave` from a DFT of `samples_per_period` cell-averaged
/// samples plus the closed form. `eliminated` lists the target orders.
pub fn thd_report(
    wave: &SteppedWaveform,
    eliminated: &[u32],
    samples_per_period: usize,
) -> Result<ThdReport> {
    let band_total = samples_per_period / 2 - 1;
    let spectrum = waveform_dft_spectrum(wave, samples_per_period, band_total)?;
    let fundamental = spectrum.fundamental();
    let eliminated_orders_max_relative = eliminated
        .iter()
        .filter_map(|&n| spectrum.amplitude(n as usize))
        .map(|a| a / fundamental)
        .fold(0.0, f64::max);
    Ok(ThdReport {
        thd_total: thd_total_closed_form(wave.angle_set(), wave.step_voltage())?,
        thd_total_dft: thd(&spectrum, band_total)?,
        band_total,
        thd_21: thd(&spectrum, THD_BAND_SHORT.min(band_total))?,
        eliminated_orders_max_relative,
    })
}
