//! Fisher-information quantities.
//!
//! Exact grid numerics for the post-selected budget:
//!
//! ```text
//! 𝓕_m  = 4[⟨Q̂†Q̂⟩ − |⟨Q̂†Ô⟩|²/p_f]
//! F_pf = 4 Im²⟨Q̂†Ô⟩ [1/p_f + 1/(1 − p_f)]
//! 𝓕_ps = 𝓕_m + F_pf ≤ 𝓕 = 4[⟨Â²⟩⟨M̂²⟩ − ⟨Â⟩²⟨M̂⟩²]
//! ```
//!
//! plus the qubit closed forms used as an independent oracle.

pub mod closed_form;
pub mod engine;
pub mod measurement;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, WvaError};
use crate::protocol::{meter_functions, KernelMoments, MeterFunctions, WeakValue, WvaSetup, POSTSELECTION_FLOOR};
use crate::quantum::{meter_moment, HermitianObservable, MeterModel, SystemState};

pub use closed_form::{qubit_closed_forms, QubitClosedForm, QubitRatios};
pub use engine::{engine_registry, ClosedFormEngine, FisherEngine, GridEngine, QubitScenario};
pub use measurement::{measurement_fisher, measurement_registry, MeasurementSpec, MeasurementStrategy, OutcomeModel};

/// Outcomes with probability below this floor are skipped when their
/// derivative is negligible, and are an error otherwise.
pub const PROBABILITY_FLOOR: f64 = 1e-15;
pub const DERIVATIVE_FLOOR: f64 = 1e-12;

/// Distance of p_f from {0, 1} below which the binomial term needs care.
pub const BINOMIAL_GUARD: f64 = 1e-15;

#[derive(Debug, Clone, Serialize)]
pub struct FisherReport {
    pub qfi: f64,
    pub fm: f64,
    pub fpf: f64,
    /// 𝓕_m + F_pf
    pub fps: f64,
    /// 𝓕_ps evaluated in one expression, 4[⟨Q̂†Q̂⟩ − Re²/p_f + Im²/(1 − p_f)].
    pub fps_direct: f64,
    pub p_f: f64,
    pub delta: f64,
    pub weak_value: WeakValue,
}

impl FisherReport {
    pub fn fm_over_qfi(&self) -> f64 {
        self.fm / self.qfi
    }

    pub fn fpf_over_qfi(&self) -> f64 {
        self.fpf / self.qfi
    }

    pub fn fps_over_qfi(&self) -> f64 {
        self.fps / self.qfi
    }
}

/// Σ_k (dP_k)²/P_k
pub fn classical_fisher(probabilities: &[f64], derivatives: &[f64]) -> Result<f64> {
    if probabilities.len() != derivatives.len() {
        return Err(WvaError::DimensionMismatch {
            expected: probabilities.len(),
            found: derivatives.len(),
        });
    }
    if probabilities.iter().any(|p| *p < 0.0 || !p.is_finite()) {
        return Err(WvaError::InvalidDistribution("negative or non-finite probability".into()));
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(WvaError::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    let drift: f64 = derivatives.iter().sum();
    if drift.abs() > 1e-9 {
        return Err(WvaError::InvalidDistribution(format!("derivatives sum to {drift:e}")));
    }
    let mut info = 0.0;
    for (index, (&p, &dp)) in probabilities.iter().zip(derivatives).enumerate() {
        if p < PROBABILITY_FLOOR {
            if dp.abs() < DERIVATIVE_FLOOR {
                continue;
            }
            return Err(WvaError::SingularInformation {
                index,
                probability: p,
                derivative: dp,
            });
        }
        info += dp * dp / p;
    }
    Ok(info)
}

/// QFI of a pure-state family, with the fidelity-based cross-check.
#[derive(Debug, Clone, Copy)]
pub struct QfiEstimate {
    /// 4[⟨∂ψ|∂ψ⟩ − |⟨∂ψ|ψ⟩|²] with central differences.
    pub value: f64,
    /// 8(1 − |⟨ψ(g)|ψ(g + h)⟩|)/h², Richardson-extrapolated in h.
    pub fidelity: f64,
}

pub fn qfi_pure<F>(state_fn: F, g: f64, step: f64) -> Result<QfiEstimate>
where
    F: Fn(f64) -> Vec<Complex64>,
{
    let minus = state_fn(g - step);
    let mid = state_fn(g);
    let plus = state_fn(g + step);
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    for v in [&minus, &mid, &plus] {
        let drift = (norm(v) - 1.0).abs();
        if drift > 1e-8 {
            return Err(WvaError::NormalizationDrift { drift });
        }
    }
    if minus.len() != mid.len() || plus.len() != mid.len() {
        return Err(WvaError::DimensionMismatch {
            expected: mid.len(),
            found: plus.len(),
        });
    }

    let deriv: Vec<Complex64> = plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| (p - m) / (2.0 * step))
        .collect();
    let dd = norm(&deriv);
    let dpsi: Complex64 = deriv.iter().zip(&mid).map(|(d, s)| d.conj() * s).sum();
    let value = 4.0 * (dd - dpsi.norm_sqr());

    // at the derivative step, 1 − |⟨ψ(g)|ψ(g + h)⟩| ~ h² sits at the rounding
    // level of the norms, so the fidelity form uses 100h and 200h and removes
    // the O(h²) bias by Richardson extrapolation
    let coarse = 100.0 * step;
    let f1 = fidelity_qfi(&mid, &state_fn(g + coarse), coarse);
    let f2 = fidelity_qfi(&mid, &state_fn(g + 2.0 * coarse), 2.0 * coarse);
    let fidelity = (4.0 * f1 - f2) / 3.0;
    Ok(QfiEstimate { value, fidelity })
}

/// 8(1 − |⟨a|b⟩|)/h², with 2(1 − |⟨a|b⟩|) taken from ‖a − e^{iα}b‖² so that
/// no two O(1) numbers are subtracted.
fn fidelity_qfi(a: &[Complex64], b: &[Complex64], h: f64) -> f64 {
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let overlap: Complex64 = b.iter().zip(a).map(|(y, x)| y.conj() * x).sum();
    let rot = if overlap.norm() > 0.0 {
        Complex64::from_polar(1.0, overlap.arg())
    } else {
        Complex64::new(1.0, 0.0)
    };
    let gap: f64 = a.iter().zip(b).map(|(x, y)| (x - rot * y).norm_sqr()).sum();
    let two_one_minus = gap - (norm(a) - 1.0) - (norm(b) - 1.0);
    4.0 * two_one_minus / (h * h)
}

/// Joint system⊗meter amplitudes e^{−igÂM̂}|ψ_i⟩|φ_i⟩, system index outermost.
pub fn joint_state(psi_i: &SystemState, observable: &HermitianObservable, meter: &MeterModel, g: f64) -> Vec<Complex64> {
    let comps = observable.to_eigenbasis(psi_i.amplitudes());
    let vecs = observable.eigenvectors();
    let d = observable.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); d * meter.len()];
    for (j, (&m, phi)) in meter.grid().iter().zip(meter.amplitudes()).enumerate() {
        for (k, &a) in observable.eigenvalues().iter().enumerate() {
            let coeff = comps[k] * Complex64::from_polar(1.0, -g * a * m) * phi;
            for s in 0..d {
                out[s * meter.len() + j] += vecs[(s, k)] * coeff;
            }
        }
    }
    out
}

/// 𝓕 = 4[⟨Â²⟩⟨M̂²⟩ − ⟨Â⟩²⟨M̂⟩²] for a separable initial state.
pub fn qfi_coupling(psi_i: &SystemState, observable: &HermitianObservable, meter: &MeterModel) -> f64 {
    let a1 = psi_i.expectation(observable.matrix());
    let a2 = (observable.matrix() * psi_i.amplitudes()).norm_squared();
    qfi_from_moments(a1, a2, meter_moment(meter, 1), meter_moment(meter, 2))
}

/// Coupling QFI from ⟨Â⟩, ⟨Â²⟩, ⟨M̂⟩, ⟨M̂²⟩; also covers unbalanced meters.
pub fn qfi_from_moments(a1: f64, a2: f64, m1: f64, m2: f64) -> f64 {
    4.0 * (a2 * m2 - a1 * a1 * m1 * m1)
}

fn kernels(setup: &WvaSetup, g: f64) -> (MeterFunctions, KernelMoments) {
    let f = meter_functions(setup, g);
    let k = f.moments(setup.meter());
    (f, k)
}

fn fm_from(setup: &WvaSetup, f: &MeterFunctions, k: &KernelMoments) -> Result<f64> {
    if !(k.p_f > POSTSELECTION_FLOOR) {
        return Err(WvaError::PostSelectionImpossible { p_f: k.p_f });
    }
    // Σ_j P_j |q_j − c o_j|² with c = ⟨Ô†Q̂⟩/p_f equals ⟨Q̂†Q̂⟩ − |⟨Q̂†Ô⟩|²/p_f
    // as a sum of non-negative terms
    let c = k.qo.conj() / k.p_f;
    let s: f64 = f
        .o_values
        .iter()
        .zip(&f.q_values)
        .zip(setup.meter().probabilities())
        .map(|((o, q), p)| (q - c * o).norm_sqr() * p)
        .sum();
    Ok(4.0 * s)
}

fn fpf_from(k: &KernelMoments, qfi: f64) -> Result<f64> {
    let dp = k.dp_f();
    let im2 = k.qo.im * k.qo.im;
    let in_guard = k.p_f < BINOMIAL_GUARD || k.p_fail < BINOMIAL_GUARD;
    if in_guard && dp.abs() < DERIVATIVE_FLOOR {
        return Ok(0.0);
    }
    let value = 4.0 * im2 / k.p_f + 4.0 * im2 / k.p_fail;
    if in_guard && (!value.is_finite() || value > qfi * (1.0 + 1e-6)) {
        return Err(WvaError::BinomialDegenerate {
            p_f: k.p_f,
            derivative: dp,
        });
    }
    if !value.is_finite() {
        return Err(WvaError::BinomialDegenerate {
            p_f: k.p_f,
            derivative: dp,
        });
    }
    Ok(value)
}

/// 𝓕_m(g): the best meter measurement after post-selection, weighted by p_f.
pub fn fm_bound(setup: &WvaSetup, g: f64) -> Result<f64> {
    let (f, k) = kernels(setup, g);
    fm_from(setup, &f, &k)
}

/// F_pf(g): information carried by the success/failure counts.
pub fn fpf_info(setup: &WvaSetup, g: f64) -> Result<f64> {
    let (_, k) = kernels(setup, g);
    fpf_from(&k, qfi_coupling(setup.psi_i(), setup.observable(), setup.meter()))
}

pub fn fps_total(setup: &WvaSetup, g: f64) -> Result<FisherReport> {
    let (f, k) = kernels(setup, g);
    let qfi = qfi_coupling(setup.psi_i(), setup.observable(), setup.meter());
    let fm = fm_from(setup, &f, &k)?;
    let fpf = fpf_from(&k, qfi)?;
    let im_term = if fpf == 0.0 { 0.0 } else { k.qo.im * k.qo.im / k.p_fail };
    let fps_direct = 4.0 * (k.qq - k.qo.re * k.qo.re / k.p_f + im_term);
    Ok(FisherReport {
        qfi,
        fm,
        fpf,
        fps: fm + fpf,
        fps_direct,
        p_f: k.p_f,
        delta: setup.delta(),
        weak_value: setup.weak_value(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{gaussian_meter, sigma_x, sigma_z, spectral_decompose, bloch_state, QubitAngles};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn meter(delta: f64) -> MeterModel {
        gaussian_meter(delta, 2001, 8.0).unwrap()
    }

    #[test]
    fn classical_fisher_examples() {
        assert_abs_diff_eq!(classical_fisher(&[0.5, 0.5], &[1.0, -1.0]).unwrap(), 4.0, epsilon = 1e-14);
        assert_eq!(classical_fisher(&[0.3, 0.7], &[0.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(classical_fisher(&[0.25, 0.75], &[0.6, -0.6]).unwrap(), 1.92, epsilon = 1e-14);
    }

    #[test]
    fn classical_fisher_floor() {
        assert_abs_diff_eq!(
            classical_fisher(&[0.0, 1.0], &[0.0, 0.0]).unwrap(),
            0.0,
            epsilon = 0.0
        );
        assert!(matches!(
            classical_fisher(&[0.0, 1.0], &[1e-6, -1e-6]),
            Err(WvaError::SingularInformation { index: 0, .. })
        ));
        assert!(classical_fisher(&[0.2, 0.2], &[0.0, 0.0]).is_err());
        assert!(classical_fisher(&[0.5, 0.5], &[0.1, 0.1]).is_err());
    }

    #[test]
    fn qfi_pure_examples() {
        let fixed = |_g: f64| vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        assert_abs_diff_eq!(qfi_pure(fixed, 0.3, 1e-5).unwrap().value, 0.0, epsilon = 1e-12);

        // e^{−igσ_x}|0⟩ has generator variance 1
        let family = |g: f64| vec![Complex64::new(g.cos(), 0.0), Complex64::new(0.0, -g.sin())];
        let est = qfi_pure(family, 0.4, 1e-5).unwrap();
        assert_abs_diff_eq!(est.value, 4.0, epsilon = 1e-8);
        assert!((est.fidelity / est.value - 1.0).abs() < 1e-6);

        let drifting = |g: f64| vec![Complex64::new(1.0 + g, 0.0), Complex64::new(0.0, 0.0)];
        assert!(matches!(qfi_pure(drifting, 0.1, 1e-5), Err(WvaError::NormalizationDrift { .. })));
    }

    #[test]
    fn joint_state_qfi_matches_coupling_bound() {
        let m = meter(1.0);
        let obs = spectral_decompose(&sigma_z()).unwrap();
        let psi = bloch_state(QubitAngles::new(PI / 3.0, 0.0));
        let step = 1e-5;
        let est = qfi_pure(|g| joint_state(&psi, &obs, &m, g), 0.1, step).unwrap();
        assert_abs_diff_eq!(est.value, 4.0, epsilon = 1e-6);
        assert!((est.fidelity / est.value - 1.0).abs() < 1e-6, "{est:?}");
        assert_abs_diff_eq!(qfi_coupling(&psi, &obs, &m), 4.0, epsilon = 0.0);
    }

    #[test]
    fn qfi_coupling_examples() {
        let obs = spectral_decompose(&sigma_z()).unwrap();
        let psi = bloch_state(QubitAngles::new(PI / 3.0, 0.0));
        assert_eq!(qfi_coupling(&psi, &obs, &meter(0.5)), 1.0);
        assert_eq!(qfi_from_moments(0.5, 1.0, 1.0, 2.0), 7.0);
        // balanced meter: 4⟨Â²⟩Δ² independent of ⟨Â⟩
        let x = spectral_decompose(&sigma_x()).unwrap();
        assert_abs_diff_eq!(qfi_coupling(&psi, &x, &meter(1.5)), 9.0, epsilon = 1e-12);
    }

    #[test]
    fn fm_examples() {
        let s = WvaSetup::qubit_optimal(PI / 3.0, meter(1.0)).unwrap();
        let fm = fm_bound(&s, 0.1).unwrap();
        assert_abs_diff_eq!(fm / 4.0, 0.956878, epsilon = 1e-6);
        assert_abs_diff_eq!(fm, 3.82751, epsilon = 5e-6);

        let eq = WvaSetup::qubit_optimal(PI / 2.0, meter(1.0)).unwrap();
        let ratio = fm_bound(&eq, 0.1).unwrap() / 4.0;
        assert!(ratio > 1e-5 && ratio < 1e-4, "ratio {ratio:e}");

        for theta in [0.3, PI / 3.0, 1.2] {
            let s = WvaSetup::qubit_optimal(theta, meter(1.0)).unwrap();
            let a_fi = s.matrix_element(1).norm_sqr();
            assert_abs_diff_eq!(fm_bound(&s, 0.0).unwrap(), 4.0 * a_fi, epsilon = 1e-12);
            assert_abs_diff_eq!(a_fi, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fpf_examples() {
        let eq = WvaSetup::qubit_optimal(PI / 2.0, meter(1.0)).unwrap();
        assert_abs_diff_eq!(fpf_info(&eq, 0.1).unwrap() / 4.0, 0.98014, epsilon = 1e-5);
        let s = WvaSetup::qubit_optimal(PI / 3.0, meter(1.0)).unwrap();
        assert_abs_diff_eq!(fpf_info(&s, 0.1).unwrap() / 4.0, 0.028272, epsilon = 5e-7);
        let pole = WvaSetup::qubit_optimal(0.0, meter(1.0)).unwrap();
        assert_eq!(fpf_info(&pole, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn fps_examples() {
        let s = WvaSetup::qubit_optimal(PI / 3.0, meter(1.0)).unwrap();
        let r = fps_total(&s, 0.1).unwrap();
        assert_abs_diff_eq!(r.fps_over_qfi(), 0.985150, epsilon = 1e-6);
        assert_abs_diff_eq!(r.fps, r.fps_direct, epsilon = 1e-10);

        let r0 = fps_total(&s, 0.0).unwrap();
        assert!(r0.fpf < 1e-30);
        assert_abs_diff_eq!(r0.fps, 4.0 * s.matrix_element(1).norm_sqr(), epsilon = 1e-12);

        let same = WvaSetup::qubit(PI / 2.0, PI / 2.0, 0.0, meter(1.0)).unwrap();
        let r = fps_total(&same, 1e-3).unwrap();
        assert!(r.fm / r.qfi < 0.01, "{r:?}");
        assert!((r.fpf / r.qfi - 1.0).abs() < 0.01, "{r:?}");
    }

    #[test]
    fn fps_not_above_qfi_for_random_qubits() {
        let m = meter(1.0);
        for k in 0..40 {
            let t = 0.07 * k as f64 + 0.01;
            let s = WvaSetup::qubit(t, 3.0 - t, 0.3 * k as f64, m.clone()).unwrap();
            let r = fps_total(&s, 0.05 + 0.01 * k as f64).unwrap();
            assert!(r.fps <= r.qfi * (1.0 + 1e-9), "{r:?}");
            assert!(r.fm >= 0.0 && r.fpf >= 0.0);
            assert!((r.fps - r.fps_direct).abs() <= 1e-10 * r.qfi);
        }
    }
}
