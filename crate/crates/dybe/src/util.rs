//! Small numeric helpers shared across modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Largest entry magnitude of a complex matrix.
pub trait ComplexAmax {
    fn camax(&self) -> f64;
}

impl ComplexAmax for DMatrix<Complex64> {
    fn camax(&self) -> f64 {
        self.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }
}
