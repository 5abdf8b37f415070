//! Numerical toolkit for computational complex/harmonic analysis on the unit
//! circle and disk: structured singular measures and their entropy
//! classification, inner functions and reproducing kernels, FFT-based
//! projection/Toeplitz operators, an outer-function smoothing sequence, and
//! Bergman-space least-squares experiments.
//!
//! Conventions used throughout:
//! * angles are in normalized turns (full circle = 1);
//! * logarithms are natural;
//! * `dm` is normalized arc length, `dA` normalized area measure on the disk.

pub mod bergman_lab;
pub mod boundary_measures;
pub mod circle_harmonics;
pub mod error;
pub mod inner_functions;
pub mod smoothing_pipeline;

pub use error::ModelError;

/// Complex scalar used everywhere.
pub type C64 = num_complex::Complex64;

/// Turns -> point on the unit circle.
pub fn unit(t: f64) -> C64 {
    let a = std::f64::consts::TAU * t;
    C64::new(a.cos(), a.sin())
}
