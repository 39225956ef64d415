use nalgebra::{DMatrix, DVector};

use super::LieGroup;

/// The real line under addition; a one-dimensional variable type.
///
/// Useful for scalar estimation problems (robust averaging and the like)
/// that exercise the optimizer without any rotation structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R1(pub f64);

impl LieGroup for R1 {
    const DIM: usize = 1;

    fn identity() -> Self {
        R1(0.0)
    }

    fn compose(&self, other: &Self) -> Self {
        R1(self.0 + other.0)
    }

    fn inverse(&self) -> Self {
        R1(-self.0)
    }

    fn retract(&self, delta: &DVector<f64>) -> Self {
        assert_eq!(delta.len(), 1, "tangent dimension mismatch for R1");
        R1(self.0 + delta[0])
    }

    fn local(&self, other: &Self) -> DVector<f64> {
        DVector::from_vec(vec![other.0 - self.0])
    }

    fn adjoint(&self) -> DMatrix<f64> {
        DMatrix::identity(1, 1)
    }

    fn inv_right_jacobian(_tau: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(1, 1)
    }

    fn translation(&self) -> DVector<f64> {
        DVector::from_vec(vec![self.0])
    }
}
