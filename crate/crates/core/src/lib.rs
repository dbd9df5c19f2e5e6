//! Selective harmonic elimination for cascaded H-bridge inverters, spectral
//! analysis of the resulting staircase voltages, and phasor / time-domain
//! models of a series-series compensated inductive power link.
//!
//! - [`waveform`]: stepped output voltage and its closed-form Fourier series
//! - [`she`]: Newton, multistart and lattice-oracle solvers for firing angles
//! - [`spectrum`]: DFT spectra and THD
//! - [`wpt`]: first-harmonic model of the coupled-coil link
//! - [`transient`]: RK4 simulation of the tank
//! - [`cli`]: command-line front end and report assembly

// `!(x > 0.0)` style checks are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod export;
pub mod report;
pub mod she;
pub mod spectrum;
pub mod transient;
pub mod waveform;
pub mod wpt;

pub use error::{Error, Result};
