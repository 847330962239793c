//! Electromagnetic scattering by an open rectangular cavity in a perfectly
//! conducting ground plane.
//!
//! The field inside the cavity is expanded in transverse Fourier modes and
//! discretized vertically by second-order finite differences. A tridiagonal
//! elimination per mode compresses the interior onto the aperture, where a
//! nonlocal transparent boundary condition closes the system. The aperture
//! integrals of that condition are evaluated by FFT convolution with a
//! closed-form/asymptotic kernel transform.

pub mod config;
pub mod farfield;
pub mod interface;
pub mod modal;
pub mod pipeline;
pub mod quad;
pub mod singular;
pub mod tbc;
pub mod vertical;

pub use num_complex::Complex64 as C64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("{0}")]
    Domain(String),
    #[error("resonant mode ({m},{n}): pivot {pivot:e} at row {row}")]
    Resonance { m: usize, n: usize, row: usize, pivot: f64 },
    #[error("aperture system is numerically singular (pivot ratio {0:e})")]
    Singular(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: &str, msg: impl Into<String>) -> Self {
        Error::Config { key: key.to_string(), msg: msg.into() }
    }
}
