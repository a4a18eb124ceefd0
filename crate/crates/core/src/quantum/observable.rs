use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, WvaError};

/// Maximum entrywise deviation from A = A† accepted by [`spectral_decompose`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// A Hermitian coupling operator together with its spectral decomposition.
///
/// Eigenvalues are sorted ascending and each eigenvector carries a fixed
/// phase: its largest-magnitude component (first one on ties) is real and
/// positive.
#[derive(Debug, Clone)]
pub struct HermitianObservable {
    matrix: DMatrix<Complex64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl HermitianObservable {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors as orthonormal columns, in eigenvalue order.
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> DVector<Complex64> {
        self.eigenvectors.column(k).into_owned()
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Spread a_max − a_min of the spectrum.
    pub fn spectral_range(&self) -> f64 {
        let lo = self.eigenvalues.first().copied().unwrap_or(0.0);
        let hi = self.eigenvalues.last().copied().unwrap_or(0.0);
        hi - lo
    }

    /// Âⁿ rebuilt from the spectral data.
    pub fn power(&self, n: u32) -> DMatrix<Complex64> {
        let v = &self.eigenvectors;
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|a| Complex64::new(a.powi(n as i32), 0.0)),
        ));
        v * d * v.adjoint()
    }

    /// ‖V diag(λ) V† − A‖_max
    pub fn reconstruction_error(&self) -> f64 {
        (self.power(1) - &self.matrix).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Components ⟨a|ψ⟩ of a vector in the eigenbasis.
    pub fn to_eigenbasis(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        self.eigenvectors.adjoint() * psi
    }
}

/// Diagonalizes a Hermitian matrix.
pub fn spectral_decompose(matrix: &DMatrix<Complex64>) -> Result<HermitianObservable> {
    let (rows, cols) = matrix.shape();
    if rows != cols {
        return Err(WvaError::DimensionMismatch {
            expected: rows,
            found: cols,
        });
    }
    if rows < 2 {
        return Err(WvaError::DimensionTooSmall { dim: rows });
    }
    let deviation = (matrix - matrix.adjoint())
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    if deviation > HERMITIAN_TOLERANCE || matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(WvaError::NotHermitian { deviation });
    }

    // symmetrize away the admissible rounding before diagonalizing
    let herm = (matrix + matrix.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();

    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut vectors = DMatrix::zeros(rows, rows);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        let v_norm = v.norm();
        v.unscale_mut(v_norm);
        let pivot = (0..rows)
            .fold((0usize, -1.0f64), |(bi, bm), i| {
                let m = v[i].norm();
                // strict comparison with a small margin keeps the first of near-ties
                if m > bm + 1e-12 {
                    (i, m)
                } else {
                    (bi, bm)
                }
            })
            .0;
        let phase = v[pivot].conj() / v[pivot].norm();
        v.apply(|z| *z *= phase);
        v[pivot] = Complex64::new(v[pivot].re, 0.0);
        vectors.set_column(col, &v);
    }

    Ok(HermitianObservable {
        matrix: matrix.clone(),
        eigenvalues: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        eigenvectors: vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::state::{sigma_x, sigma_z};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn sigma_z_spectrum() {
        let obs = spectral_decompose(&sigma_z()).unwrap();
        assert_eq!(obs.eigenvalues(), &[-1.0, 1.0]);
        let v0 = obs.eigenvector(0);
        let v1 = obs.eigenvector(1);
        assert_abs_diff_eq!(v0[1].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v1[0].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn sigma_x_spectrum() {
        let obs = spectral_decompose(&sigma_x()).unwrap();
        assert_abs_diff_eq!(obs.eigenvalues()[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(obs.eigenvalues()[1], 1.0, epsilon = 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = obs.eigenvector(0);
        let v1 = obs.eigenvector(1);
        assert_abs_diff_eq!((v0[0] - Complex64::new(h, 0.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((v0[1] - Complex64::new(-h, 0.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((v1[0] - Complex64::new(h, 0.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((v1[1] - Complex64::new(h, 0.0)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_is_degenerate_but_exact() {
        let id = DMatrix::<Complex64>::identity(2, 2);
        let obs = spectral_decompose(&id).unwrap();
        assert_eq!(obs.eigenvalues(), &[1.0, 1.0]);
        assert!(obs.reconstruction_error() < 1e-14);
        let v = obs.eigenvectors();
        let gram = v.adjoint() * v;
        assert!((gram - DMatrix::identity(2, 2)).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(spectral_decompose(&m), Err(WvaError::NotHermitian { .. })));
    }

    fn hermitian(dim: usize, entries: &[f64]) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(dim, dim);
        let mut it = entries.iter();
        for i in 0..dim {
            m[(i, i)] = Complex64::new(*it.next().unwrap(), 0.0);
            for j in (i + 1)..dim {
                let z = Complex64::new(*it.next().unwrap(), *it.next().unwrap());
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    proptest! {
        #[test]
        fn reconstruction_and_orthonormality(dim in 2usize..6, seed in prop::collection::vec(-3.0f64..3.0, 36)) {
            let m = hermitian(dim, &seed);
            let obs = spectral_decompose(&m).unwrap();
            prop_assert!(obs.reconstruction_error() <= 1e-10);
            let v = obs.eigenvectors();
            let gram = v.adjoint() * v;
            let off = (gram - DMatrix::<Complex64>::identity(dim, dim)).iter().fold(0.0f64, |a, z| a.max(z.norm()));
            prop_assert!(off < 1e-10);
            prop_assert!(obs.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
