//! Numerical laboratory for EP, SD, hypo-EP, n-EP and n-hypo-EP matrices.

pub mod classes;
pub mod cli;
pub mod error;
pub mod generators;
pub mod linalg;
pub mod matrix;
pub mod matrix_file;
pub mod suite;
pub mod tolerance;

pub use error::{LabError, Result};
pub use matrix::ComplexMatrix;
pub use tolerance::ToleranceConfig;
