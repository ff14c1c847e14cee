//! Exact and numerical solutions of the complex Burgers and KdV–Burgers
//! equations on the torus with one-sided Fourier data.

pub mod blowup;
pub mod error;
pub mod exact_series;
pub mod numeric;
pub mod params;
pub mod partitions;
pub mod regularity;
pub mod spectral;

pub use error::{Error, Result};
pub use numeric::{BigComplex, ComplexInput, GaussianRational, Real};
pub use params::ModelParams;
