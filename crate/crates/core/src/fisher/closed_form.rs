//! Exact qubit formulas for Â = σ_z and a balanced Gaussian meter.
//!
//! With A = cos(θ_i/2)cos(θ_f/2), B = e^{iφ} sin(θ_i/2)sin(θ_f/2) and x = g²Δ²:
//!
//! ```text
//! p_f      = A² + |B|² + 2A·Re B·e^{−2x}
//! 𝓕_m/𝓕   = A² + |B|² − 2A·Re B·e^{−2x}(1 − 4x) − 16A²Re²B·x·e^{−4x}/p_f
//! F_pf/𝓕  = 16A²Re²B·x·e^{−4x}/(p_f(1 − p_f))
//! ```
//!
//! Every difference of O(1) terms that vanishes at a pole or at g = 0 is
//! rewritten with expm1 so the small quantities keep full relative precision.

use num_complex::Complex64;
use serde::Serialize;

use super::FisherReport;
use crate::protocol::{WeakValue, WEAK_VALUE_OVERLAP_FLOOR};

/// Angles below this distance from φ = 0 or φ = π select the dedicated branch.
const PHASE_BRANCH_TOLERANCE: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitClosedForm {
    pub theta_i: f64,
    pub theta_f: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitRatios {
    pub p_f: f64,
    pub p_fail: f64,
    pub fm_over_qfi: f64,
    pub fpf_over_qfi: f64,
    pub fps_over_qfi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    /// θ_i = θ_f, φ = π: post-selection on σ_z ψ_i.
    Optimal,
    /// θ_i = θ_f, φ = 0: post-selection on ψ_i.
    Initial,
    General,
}

impl QubitClosedForm {
    pub fn new(theta_i: f64, theta_f: f64, phi: f64) -> Self {
        Self { theta_i, theta_f, phi }
    }

    pub fn optimal(theta: f64) -> Self {
        Self::new(theta, theta, std::f64::consts::PI)
    }

    fn reduced_phi(&self) -> f64 {
        self.phi.rem_euclid(2.0 * std::f64::consts::PI)
    }

    fn branch(&self) -> Branch {
        if self.theta_i != self.theta_f {
            return Branch::General;
        }
        let phi = self.reduced_phi();
        let two_pi = 2.0 * std::f64::consts::PI;
        if (phi - std::f64::consts::PI).abs() <= PHASE_BRANCH_TOLERANCE {
            Branch::Optimal
        } else if phi <= PHASE_BRANCH_TOLERANCE || two_pi - phi <= PHASE_BRANCH_TOLERANCE {
            Branch::Initial
        } else {
            Branch::General
        }
    }

    /// (A, B)
    pub fn coefficients(&self) -> (f64, Complex64) {
        let (si, ci) = (self.theta_i / 2.0).sin_cos();
        let (sf, cf) = (self.theta_f / 2.0).sin_cos();
        (ci * cf, Complex64::from_polar(si * sf, self.reduced_phi()))
    }

    /// |⟨ψ_f|ψ_i⟩| = |A + B̄|
    pub fn overlap(&self) -> f64 {
        let (a, b) = self.coefficients();
        (a + b.conj()).norm()
    }

    /// A_w = (A − B̄)/(A + B̄) up to the common phase, which cancels.
    pub fn weak_value(&self) -> WeakValue {
        let (a, b) = self.coefficients();
        let den = a + b.conj();
        if den.norm() < WEAK_VALUE_OVERLAP_FLOOR {
            return WeakValue::Divergent;
        }
        let w = (a - b.conj()) / den;
        WeakValue::Finite { re: w.re, im: w.im }
    }

    pub fn ratios(&self, g_delta: f64) -> QubitRatios {
        let x = g_delta * g_delta;
        let e2 = (-2.0 * x).exp();
        let e4 = (-4.0 * x).exp();
        let em1 = (-2.0 * x).exp_m1();
        let (p_f, p_fail, fm, fpf) = match self.branch() {
            Branch::Optimal => {
                let (s, c) = self.theta_i.sin_cos();
                let (s2, c2) = (s * s, c * c);
                // 1 + cos²θ − e^{−2x} sin²θ
                let d = 2.0 * c2 - s2 * em1;
                let p_f = 0.5 * d;
                let p_fail = 0.5 * s2 * (1.0 + e2);
                let fm = 1.0 + 0.5 * s2 * em1 - 2.0 * x * e2 * s2 - 2.0 * x * e4 * s2 * s2 / d;
                let fpf = if s2 == 0.0 {
                    0.0
                } else {
                    4.0 * x * e4 * s2 / (d * (1.0 + e2))
                };
                (p_f, p_fail, fm, fpf)
            }
            Branch::Initial => {
                let (s, c) = self.theta_i.sin_cos();
                let (s2, c2) = (s * s, c * c);
                // 1 + cos²θ + e^{−2x} sin²θ
                let d = 2.0 + s2 * em1;
                let p_f = 0.5 * d;
                let p_fail = -0.5 * s2 * em1;
                let fm = c2 - 0.5 * s2 * em1 + 2.0 * x * e2 * s2 - 2.0 * x * e4 * s2 * s2 / d;
                let fpf = if s2 == 0.0 || x == 0.0 {
                    0.0
                } else {
                    4.0 * x * e4 * s2 / (d * -em1)
                };
                (p_f, p_fail, fm, fpf)
            }
            Branch::General => {
                let (a, b) = self.coefficients();
                let ab = a * b.re;
                let p_f = (a + b.conj()).norm_sqr() + 2.0 * ab * em1;
                let (si, ci) = (self.theta_i / 2.0).sin_cos();
                let (sf, cf) = (self.theta_f / 2.0).sin_cos();
                let cross = Complex64::new(sf * ci, 0.0) - Complex64::from_polar(cf * si, -self.reduced_phi());
                let p_fail = cross.norm_sqr() - 2.0 * ab * em1;
                let base = (a - b.re).powi(2) + b.im * b.im - 2.0 * ab * em1;
                let fm = base + 8.0 * ab * x * e2 - 16.0 * ab * ab * x * e4 / p_f;
                let num = 16.0 * ab * ab * x * e4;
                let fpf = if num == 0.0 { 0.0 } else { num / (p_f * p_fail) };
                (p_f, p_fail, fm, fpf)
            }
        };
        QubitRatios {
            p_f,
            p_fail,
            fm_over_qfi: fm,
            fpf_over_qfi: fpf,
            fps_over_qfi: fm + fpf,
        }
    }

    /// Full report for a meter of spread Δ, where 𝓕 = 4Δ².
    pub fn report(&self, g_delta: f64, delta: f64) -> FisherReport {
        let r = self.ratios(g_delta);
        let qfi = 4.0 * delta * delta;
        let fm = r.fm_over_qfi * qfi;
        let fpf = r.fpf_over_qfi * qfi;
        FisherReport {
            qfi,
            fm,
            fpf,
            fps: fm + fpf,
            fps_direct: fm + fpf,
            p_f: r.p_f,
            delta: self.overlap(),
            weak_value: self.weak_value(),
        }
    }
}

/// Closed-form report at coupling g = g_delta/Δ.
pub fn qubit_closed_forms(theta_i: f64, theta_f: f64, phi: f64, g_delta: f64, delta: f64) -> FisherReport {
    QubitClosedForm::new(theta_i, theta_f, phi).report(g_delta, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    /// The three printed formulas, evaluated literally.
    fn literal(theta_i: f64, theta_f: f64, phi: f64, gd: f64) -> (f64, f64, f64) {
        let a = (theta_i / 2.0).cos() * (theta_f / 2.0).cos();
        let b = Complex64::from_polar((theta_i / 2.0).sin() * (theta_f / 2.0).sin(), phi);
        let x = gd * gd;
        let p_f = a * a + b.norm_sqr() + 2.0 * a * b.re * (-2.0 * x).exp();
        let fm = a * a + b.norm_sqr() - 2.0 * a * b.re * (-2.0 * x).exp() * (1.0 - 4.0 * x)
            - 16.0 * a * a * b.re * b.re * x * (-4.0 * x).exp() / p_f;
        let fpf = 16.0 * x * a * a * b.re * b.re * (-4.0 * x).exp() / (p_f * (1.0 - p_f));
        (p_f, fm, fpf)
    }

    #[test]
    fn optimal_pi_over_three() {
        let r = QubitClosedForm::optimal(PI / 3.0).ratios(0.1);
        assert_abs_diff_eq!(r.p_f, 0.257425, epsilon = 1e-6);
        assert_abs_diff_eq!(r.fm_over_qfi, 0.956878, epsilon = 1e-6);
        assert_abs_diff_eq!(r.fpf_over_qfi, 0.028272, epsilon = 1e-6);
        assert_abs_diff_eq!(r.fps_over_qfi, 0.985150, epsilon = 1e-6);
        let rep = qubit_closed_forms(PI / 3.0, PI / 3.0, PI, 0.1, 1.0);
        assert_abs_diff_eq!(rep.fm, 3.82751, epsilon = 1e-5);
        assert_abs_diff_eq!(rep.delta, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.weak_value.value().unwrap().re, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn equator_is_counts_dominated() {
        let r = QubitClosedForm::optimal(PI / 2.0).ratios(0.1);
        assert_abs_diff_eq!(r.p_f, 0.009901, epsilon = 1e-6);
        assert_abs_diff_eq!(r.fpf_over_qfi, 0.98014, epsilon = 1e-5);
        assert!(r.fm_over_qfi > 0.0 && r.fm_over_qfi < 1e-4);
        assert!(QubitClosedForm::optimal(PI / 2.0).weak_value().is_divergent());
    }

    #[test]
    fn eigenstate_keeps_everything_in_the_meter() {
        for branch_phi in [PI, 0.0] {
            let r = QubitClosedForm::new(0.0, 0.0, branch_phi).ratios(0.1);
            assert_abs_diff_eq!(r.fm_over_qfi, 1.0, epsilon = 1e-14);
            assert_eq!(r.fpf_over_qfi, 0.0);
        }
    }

    #[test]
    fn small_coupling_limit_matches_meter_expansion() {
        let theta = PI / 3.0;
        let d2 = theta.cos().powi(2);
        for gd in [1e-2, 3e-3, 1e-3] {
            let r = QubitClosedForm::optimal(theta).ratios(gd);
            let expect = d2 / (d2 + (1.0 - d2) * gd * gd);
            assert!((r.fm_over_qfi - expect).abs() <= 10.0 * gd * gd * expect);
        }
        assert_abs_diff_eq!(QubitClosedForm::optimal(theta).ratios(1e-9).fm_over_qfi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn branches_agree_with_general_formula() {
        for k in 1..40 {
            let theta = k as f64 * PI / 40.0;
            for gd in [1e-2, 0.1, 0.3] {
                for phi in [PI, 0.0] {
                    let special = QubitClosedForm::new(theta, theta, phi).ratios(gd);
                    let (p_f, fm, fpf) = literal(theta, theta, phi, gd);
                    assert_abs_diff_eq!(special.p_f, p_f, epsilon = 1e-13);
                    assert_abs_diff_eq!(special.fm_over_qfi, fm, epsilon = 1e-12);
                    assert_abs_diff_eq!(special.fpf_over_qfi, fpf, epsilon = 1e-10);
                    // nudging φ off the branch must change nothing visible
                    let general = QubitClosedForm::new(theta, theta, phi + 1e-9).ratios(gd);
                    assert_abs_diff_eq!(special.fm_over_qfi, general.fm_over_qfi, epsilon = 1e-7);
                }
            }
        }
    }

    #[test]
    fn general_formula_matches_literal_and_sums_to_one() {
        for (ti, tf, phi) in [(0.4, 1.9, 0.7), (2.2, 0.3, 4.0), (1.0, 2.0, 2.5)] {
            let c = QubitClosedForm::new(ti, tf, phi);
            let r = c.ratios(0.15);
            let (p_f, fm, fpf) = literal(ti, tf, phi, 0.15);
            assert_abs_diff_eq!(r.p_f, p_f, epsilon = 1e-13);
            assert_abs_diff_eq!(r.fm_over_qfi, fm, epsilon = 1e-12);
            assert_abs_diff_eq!(r.fpf_over_qfi, fpf, epsilon = 1e-12);
            assert_abs_diff_eq!(r.p_f + r.p_fail, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn initial_state_partition() {
        let theta: f64 = 1.1;
        let r = QubitClosedForm::new(theta, theta, 0.0).ratios(1e-3);
        assert_abs_diff_eq!(r.fm_over_qfi, theta.cos().powi(2), epsilon = 1e-5);
        assert_abs_diff_eq!(r.fpf_over_qfi, theta.sin().powi(2), epsilon = 1e-5);
    }
}
