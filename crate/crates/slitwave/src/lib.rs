//! Matter-wave double-slit diffraction simulator.
//!
//! The engine computes the wavefunction of a heavy molecule (C60-class)
//! inside each slit as a truncated eigenmode expansion, propagates the
//! slit-exit wavefunction to a distant screen with the free-particle
//! path-integral kernel in the paraxial regime, and combines the two slit
//! amplitudes into a coherent or decoherence-damped intensity pattern.
//!
//! All physical quantities are in SI units (meters, 1/m). The engine is
//! parameterized by the de Broglie wavelength alone; mass and energy enter
//! every formula only through the wavenumber k = 2*pi/lambda.

pub mod cli;
pub mod core;
pub mod intensity;
pub mod oracle;
pub mod propagation;
pub mod slit_modes;

pub use crate::core::{
    make_preset, sin_beta_from_position, CoherenceConfig, ExperimentPreset, Particle,
    ScreenPoint, SlitGeometry,
};
pub use crate::intensity::{
    alpha_from_visibility, coherent_intensity, decohered_intensity, lambda_from_alpha,
    screen_scan, visibility, DiffractionPattern, IntensityMode, Normalization, ScanGrid,
};
pub use crate::slit_modes::{SlitSide, Truncation};

use thiserror::Error;

/// Error type shared by the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid particle: {0}")]
    InvalidParticle(String),

    #[error("invalid coherence parameters: {0}")]
    InvalidCoherence(String),

    #[error("unknown preset '{name}', known presets: {known}")]
    UnknownPreset { name: String, known: String },

    #[error("point ({x}, {y}, {z}) is outside the {side:?} aperture")]
    OutsideAperture {
        x: f64,
        y: f64,
        z: f64,
        side: crate::slit_modes::SlitSide,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "mode sum did not converge at s = {s_m} m: tail estimate {tail:.3e} \
         exceeds tolerance {tol:.3e} at the hard cap m_max = {m_max}"
    )]
    TruncationCap {
        s_m: f64,
        tail: f64,
        tol: f64,
        m_max: usize,
    },

    #[error(
        "quadrature subdivision budget exhausted: best estimate {best_re}+{best_im}i \
         with error estimate {err_est:.3e}"
    )]
    QuadratureBudget {
        best_re: f64,
        best_im: f64,
        err_est: f64,
    },

    #[error("visibility: {0}")]
    Visibility(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
