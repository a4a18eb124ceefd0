//! Discretized meter states.
//!
//! The meter lives on a uniform grid of eigenvalues m_j of M̂. Trapezoidal
//! quadrature weights are folded into the amplitudes, so Σ_j |φ_j|² = 1 and
//! grid sums Σ_j f(m_j)|φ_j|² are quadratures of ∫ f(m)|φ(m)|² dm.

use num_complex::Complex64;

use crate::error::{Result, WvaError};

pub const DEFAULT_GRID_POINTS: usize = 2001;
pub const DEFAULT_HALF_WIDTH_SIGMAS: f64 = 8.0;

/// Closed-form moments ⟨M̂ᵏ⟩ of a meter distribution.
pub trait MomentProvider: Send + Sync + std::fmt::Debug {
    fn moment(&self, k: u32) -> f64;
}

/// Centered normal distribution of M̂ eigenvalues with standard deviation Δ.
#[derive(Debug, Clone, Copy)]
pub struct GaussianMoments {
    pub delta: f64,
}

impl MomentProvider for GaussianMoments {
    /// (k−1)!!·Δᵏ for even k, zero for odd k.
    fn moment(&self, k: u32) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        let double_factorial: f64 = (1..k).step_by(2).map(|j| j as f64).product();
        double_factorial * self.delta.powi(k as i32)
    }
}

#[derive(Debug, Clone)]
pub struct MeterModel {
    grid: Vec<f64>,
    amplitudes: Vec<Complex64>,
    probabilities: Vec<f64>,
    delta: f64,
    analytic: Option<std::sync::Arc<dyn MomentProvider>>,
}

impl MeterModel {
    /// Builds a meter from grid points and unnormalized amplitudes that
    /// already include quadrature weights. The result must be balanced.
    pub fn from_grid(
        grid: Vec<f64>,
        amplitudes: Vec<Complex64>,
        analytic: Option<std::sync::Arc<dyn MomentProvider>>,
    ) -> Result<Self> {
        if grid.len() != amplitudes.len() {
            return Err(WvaError::DimensionMismatch {
                expected: grid.len(),
                found: amplitudes.len(),
            });
        }
        if grid.len() < 3 {
            return Err(WvaError::InvalidMeter("need at least 3 grid points".into()));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(WvaError::InvalidMeter("amplitudes have zero norm".into()));
        }
        let amplitudes: Vec<Complex64> = amplitudes.iter().map(|a| a / norm).collect();
        let probabilities: Vec<f64> = amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let mean: f64 = grid.iter().zip(&probabilities).map(|(m, p)| m * p).sum();
        let second: f64 = grid.iter().zip(&probabilities).map(|(m, p)| m * m * p).sum();
        let delta = second.sqrt();
        if !(delta > 0.0) {
            return Err(WvaError::InvalidMeter("meter has zero spread".into()));
        }
        if mean.abs() > 1e-10 * delta {
            return Err(WvaError::InvalidMeter(format!(
                "meter is not balanced: ⟨M⟩ = {mean:e}"
            )));
        }
        let delta = analytic.as_ref().map_or(delta, |p| p.moment(2).sqrt());
        Ok(Self {
            grid,
            amplitudes,
            probabilities,
            delta,
            analytic,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// |φ_i(m_j)|², summing to one.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Δ = ⟨M̂²⟩^{1/2}
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn max_abs_m(&self) -> f64 {
        self.grid.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn has_analytic_moments(&self) -> bool {
        self.analytic.is_some()
    }

    /// Σ_j m_jᵏ |φ_j|² on the grid.
    pub fn grid_moment(&self, k: u32) -> f64 {
        self.grid
            .iter()
            .zip(&self.probabilities)
            .map(|(m, p)| m.powi(k as i32) * p)
            .sum()
    }

    pub fn analytic_moment(&self, k: u32) -> Option<f64> {
        self.analytic.as_ref().map(|p| p.moment(k))
    }
}

/// Centered Gaussian meter on a uniform grid spanning ±W·Δ.
///
/// Amplitudes are ∝ exp(−m²/4Δ²), so |φ|² is a normal density of variance Δ².
pub fn gaussian_meter(delta: f64, n_points: usize, half_width_sigmas: f64) -> Result<MeterModel> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(WvaError::InvalidMeter(format!("Δ must be positive, got {delta}")));
    }
    if n_points < 3 || n_points.is_multiple_of(2) {
        return Err(WvaError::InvalidMeter(format!(
            "grid size must be odd and at least 3, got {n_points}"
        )));
    }
    if !(half_width_sigmas > 0.0) || !half_width_sigmas.is_finite() {
        return Err(WvaError::InvalidMeter(format!(
            "half width must be positive, got {half_width_sigmas}"
        )));
    }
    let half = (n_points / 2) as i64;
    let step = half_width_sigmas * delta / half as f64;
    // integer offsets keep the grid exactly symmetric about m = 0
    let grid: Vec<f64> = (-half..=half).map(|j| j as f64 * step).collect();
    let amplitudes = grid
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let w = if j == 0 || j + 1 == n_points { 0.5 * step } else { step };
            Complex64::new((-m * m / (4.0 * delta * delta)).exp() * w.sqrt(), 0.0)
        })
        .collect();
    MeterModel::from_grid(
        grid,
        amplitudes,
        Some(std::sync::Arc::new(GaussianMoments { delta })),
    )
}

/// ⟨M̂ᵏ⟩, from the analytic provider when the meter has one, else from the grid.
pub fn meter_moment(meter: &MeterModel, k: u32) -> f64 {
    meter.analytic_moment(k).unwrap_or_else(|| meter.grid_moment(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gaussian_grid_moments() {
        let m = gaussian_meter(1.0, 2001, 8.0).unwrap();
        assert_abs_diff_eq!(m.grid_moment(2), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(m.grid_moment(4), 3.0, epsilon = 1e-9);
        let m2 = gaussian_meter(2.0, 2001, 8.0).unwrap();
        assert_abs_diff_eq!(m2.grid_moment(1), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn analytic_moment_examples() {
        let m = gaussian_meter(1.0, 2001, 8.0).unwrap();
        assert_eq!(meter_moment(&m, 6), 15.0);
        assert_eq!(meter_moment(&m, 3), 0.0);
        let half = gaussian_meter(0.5, 2001, 8.0).unwrap();
        assert_eq!(meter_moment(&half, 2), 0.25);
        assert_eq!(meter_moment(&m, 0), 1.0);
    }

    #[test]
    fn grid_matches_analytic_up_to_sixth_moment() {
        for &delta in &[0.3, 1.0, 2.0, 5.0] {
            let m = gaussian_meter(delta, 2001, 8.0).unwrap();
            for k in 0..=6u32 {
                let diff = (m.grid_moment(k) - m.analytic_moment(k).unwrap()).abs();
                assert!(diff <= 1e-8 * delta.powi(k as i32), "Δ={delta} k={k} diff={diff:e}");
            }
        }
    }

    #[test]
    fn normalized_and_balanced() {
        let m = gaussian_meter(1.7, 801, 6.0).unwrap();
        assert_abs_diff_eq!(m.probabilities().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(m.grid_moment(1).abs() <= 1e-10 * m.delta());
        assert_eq!(m.grid()[400], 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gaussian_meter(0.0, 2001, 8.0).is_err());
        assert!(gaussian_meter(-1.0, 2001, 8.0).is_err());
        assert!(gaussian_meter(1.0, 2000, 8.0).is_err());
        assert!(gaussian_meter(1.0, 1, 8.0).is_err());
        assert!(gaussian_meter(1.0, 2001, 0.0).is_err());
    }

    #[test]
    fn unbalanced_grid_is_rejected() {
        let grid = vec![0.0, 1.0, 2.0];
        let amps = vec![Complex64::new(1.0, 0.0); 3];
        assert!(MeterModel::from_grid(grid, amps, None).is_err());
    }
}
