use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WvaError};

/// Normalization tolerance applied when a state is built from user amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// A normalized pure state of the finite-dimensional system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    amplitudes: DVector<Complex64>,
}

impl SystemState {
    /// Wraps amplitudes that must already be normalized.
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(WvaError::DimensionTooSmall {
                dim: amplitudes.len(),
            });
        }
        let norm_sqr = amplitudes.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(WvaError::NotNormalized { norm_sqr });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn normalized(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(WvaError::NotNormalized {
                norm_sqr: norm * norm,
            });
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(amplitudes))
    }

    /// Computational basis state |index⟩.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        let mut v = DVector::zeros(dim);
        if index >= dim {
            return Err(WvaError::DimensionMismatch {
                expected: dim,
                found: index + 1,
            });
        }
        v[index] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &SystemState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// ⟨self|op|other⟩
    pub fn matrix_element(&self, op: &DMatrix<Complex64>, other: &SystemState) -> Complex64 {
        self.amplitudes.dotc(&(op * &other.amplitudes))
    }

    /// ⟨self|op|self⟩, real for Hermitian operators.
    pub fn expectation(&self, op: &DMatrix<Complex64>) -> f64 {
        self.matrix_element(op, self).re
    }

    pub fn with_global_phase(&self, alpha: f64) -> SystemState {
        SystemState {
            amplitudes: self.amplitudes.map(|a| a * Complex64::from_polar(1.0, alpha)),
        }
    }
}

/// Bloch-sphere angles of a qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitAngles {
    pub theta: f64,
    pub phi: f64,
}

impl QubitAngles {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }
}

/// cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩
pub fn bloch_state(angles: QubitAngles) -> SystemState {
    let (s, c) = (angles.theta / 2.0).sin_cos();
    // reduce φ so that φ and φ + 2π give bit-identical amplitudes
    let phi = angles.phi.rem_euclid(2.0 * PI);
    SystemState {
        amplitudes: DVector::from_vec(vec![
            Complex64::new(c, 0.0),
            Complex64::from_polar(s, phi),
        ]),
    }
}

pub fn sigma_x() -> DMatrix<Complex64> {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    DMatrix::from_row_slice(2, 2, &[o, l, l, o])
}

pub fn sigma_y() -> DMatrix<Complex64> {
    let (o, i) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    DMatrix::from_row_slice(2, 2, &[o, -i, i, o])
}

/// σ_z with |0⟩ ↦ +1 and |1⟩ ↦ −1.
pub fn sigma_z() -> DMatrix<Complex64> {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    DMatrix::from_row_slice(2, 2, &[l, o, o, -l])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn close(a: &SystemState, b: &[(f64, f64)]) {
        for (x, &(re, im)) in a.amplitudes().iter().zip(b) {
            assert_abs_diff_eq!(x.re, re, epsilon = 1e-12);
            assert_abs_diff_eq!(x.im, im, epsilon = 1e-12);
        }
    }

    #[test]
    fn bloch_examples() {
        close(&bloch_state(QubitAngles::new(0.0, 0.0)), &[(1.0, 0.0), (0.0, 0.0)]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        close(&bloch_state(QubitAngles::new(PI / 2.0, 0.0)), &[(h, 0.0), (h, 0.0)]);
        close(
            &bloch_state(QubitAngles::new(PI / 3.0, PI)),
            &[((PI / 6.0).cos(), 0.0), (-0.5, 0.0)],
        );
    }

    #[test]
    fn bloch_is_two_pi_periodic_in_phi() {
        for &(t, p) in &[(0.3, 0.1), (1.2, 4.0), (PI / 3.0, PI)] {
            let a = bloch_state(QubitAngles::new(t, p));
            let b = bloch_state(QubitAngles::new(t, p + 2.0 * PI));
            assert_abs_diff_eq!((a.inner(&b).norm() - 1.0), 0.0, epsilon = 1e-15);
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes().iter()) {
                assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn rejects_unnormalized_and_small() {
        let v = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!(matches!(
            SystemState::new(v.clone()),
            Err(WvaError::NotNormalized { .. })
        ));
        assert!(SystemState::normalized(v).is_ok());
        let one = DVector::from_vec(vec![Complex64::new(1.0, 0.0)]);
        assert!(matches!(
            SystemState::new(one),
            Err(WvaError::DimensionTooSmall { dim: 1 })
        ));
    }

    #[test]
    fn pauli_expectations() {
        let s = bloch_state(QubitAngles::new(PI / 3.0, 0.0));
        assert_abs_diff_eq!(s.expectation(&sigma_z()), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.expectation(&sigma_x()), (PI / 3.0).sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.expectation(&sigma_y()), 0.0, epsilon = 1e-12);
    }
}
