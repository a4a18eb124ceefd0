//! Weak-coupling expansions of the kernel moments and the Fisher limits
//! built on them.
//!
//! Each target X(g) ∈ {p_f, ⟨Q̂†Q̂⟩, ⟨Q̂†Ô⟩} is expanded to g⁴ as
//! Σ_p κ_p ⟨M̂^{k_p}⟩ gᵖ, with κ_p written in terms of δ and the matrix
//! elements (Âⁿ)_fi, n ≤ 5.

mod fisher;
mod regime;

pub use fisher::{series_fisher, series_registry, SeriesFisher, SeriesVariant, SERIES_VALIDITY_LIMIT};
pub use regime::{
    dip_profile, eqsepsilon_ratio, full_width_half_depth, regime_classify, DipRow, Regime, RegimeLabel,
    REGIME_A_THRESHOLD, REGIME_B_THRESHOLD,
};

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::protocol::{meter_functions, WvaSetup};
use crate::quantum::{meter_moment, MeterModel};

/// Highest power of g kept by the expansions.
pub const SERIES_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesTarget {
    Pf,
    QQ,
    QoReal,
    QoImag,
}

impl SeriesTarget {
    pub const ALL: [SeriesTarget; 4] = [SeriesTarget::Pf, SeriesTarget::QQ, SeriesTarget::QoReal, SeriesTarget::QoImag];

    pub fn name(self) -> &'static str {
        match self {
            SeriesTarget::Pf => "p_f",
            SeriesTarget::QQ => "QQ",
            SeriesTarget::QoReal => "QO_real",
            SeriesTarget::QoImag => "QO_imag",
        }
    }

    /// Extra power of m carried by the kernel: 0 for p_f, 2 for ⟨Q̂†Q̂⟩, 1 for ⟨Q̂†Ô⟩.
    fn meter_power(self) -> u32 {
        match self {
            SeriesTarget::Pf => 0,
            SeriesTarget::QQ => 2,
            SeriesTarget::QoReal | SeriesTarget::QoImag => 1,
        }
    }

    fn project(self, z: Complex64) -> f64 {
        match self {
            SeriesTarget::QoImag => z.im,
            _ => z.re,
        }
    }
}

impl fmt::Display for SeriesTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Coefficients c_p = κ_p⟨M̂^{k_p}⟩ of gᵖ for p = 0..4.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesCoefficients {
    pub target: SeriesTarget,
    pub coeffs: [f64; SERIES_ORDER + 1],
    pub prefactors: [f64; SERIES_ORDER + 1],
    pub moment_orders: [u32; SERIES_ORDER + 1],
}

impl SeriesCoefficients {
    /// Σ_p c_p gᵖ by Horner's rule.
    pub fn evaluate(&self, g: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * g + c)
    }
}

/// δ and (Âⁿ)_fi for n = 1..5 with the aligned post-selection.
fn matrix_elements(setup: &WvaSetup) -> [Complex64; 6] {
    let mut a = [Complex64::new(0.0, 0.0); 6];
    for (n, slot) in a.iter_mut().enumerate() {
        *slot = setup.matrix_element(n as u32);
    }
    a[0] = Complex64::new(setup.delta(), 0.0);
    a
}

/// Complex κ_p of p_f, ⟨Q̂†Q̂⟩ and ⟨Q̂†Ô⟩, term by term as in the expansions.
fn expansion_prefactors(a: &[Complex64; 6], target: SeriesTarget) -> [Complex64; 5] {
    let i = Complex64::new(0.0, 1.0);
    let d = a[0].re;
    let c = |z: Complex64| z.conj();
    let re = |z: Complex64| Complex64::new(z.re, 0.0);
    let im = |z: Complex64| Complex64::new(z.im, 0.0);
    match target {
        SeriesTarget::Pf => [
            Complex64::new(d * d, 0.0),
            2.0 * d * im(a[1]),
            Complex64::new(a[1].norm_sqr() - d * a[2].re, 0.0),
            -im(d * a[3] + 3.0 * c(a[2]) * a[1]) / 3.0,
            (re(d * a[4] - 4.0 * c(a[1]) * a[3]) + 3.0 * a[2].norm_sqr()) / 12.0,
        ],
        SeriesTarget::QQ => [
            Complex64::new(a[1].norm_sqr(), 0.0),
            -2.0 * im(c(a[2]) * a[1]),
            Complex64::new(a[2].norm_sqr() - (c(a[3]) * a[1]).re, 0.0),
            -im(a[4] * c(a[1]) - 3.0 * a[3] * c(a[2])) / 3.0,
            (re(a[5] * c(a[1]) - 4.0 * a[4] * c(a[2])) + 3.0 * a[3].norm_sqr()) / 12.0,
        ],
        SeriesTarget::QoReal | SeriesTarget::QoImag => [
            d * c(a[1]),
            i * (d * c(a[2]) - a[1].norm_sqr()),
            (2.0 * c(a[2]) * a[1] - a[2] * c(a[1]) - c(a[3]) * d) / 2.0,
            -i / 6.0 * (d * c(a[4]) - 3.0 * c(a[3]) * a[1] + 3.0 * a[2].norm_sqr() - c(a[1]) * a[3]),
            (d * c(a[5]) - 4.0 * c(a[4]) * a[1] + 6.0 * c(a[3]) * a[2] - 4.0 * c(a[2]) * a[3] + c(a[1]) * a[4])
                / 24.0,
        ],
    }
}

pub fn expand_moments_series(setup: &WvaSetup, target: SeriesTarget) -> SeriesCoefficients {
    let kappa = expansion_prefactors(&matrix_elements(setup), target);
    let s = target.meter_power();
    let mut out = SeriesCoefficients {
        target,
        coeffs: [0.0; 5],
        prefactors: [0.0; 5],
        moment_orders: [0; 5],
    };
    for (p, kp) in kappa.iter().enumerate() {
        let k = p as u32 + s;
        out.prefactors[p] = target.project(*kp);
        out.moment_orders[p] = k;
        out.coeffs[p] = out.prefactors[p] * meter_moment(setup.meter(), k);
    }
    out
}

/// Kernel weights f(a, b) such that X(g) = ⟨m^s Σ_{a,b} f(a,b) w_a* w_b e^{ig(a−b)m}⟩.
fn kernel_weight(target: SeriesTarget, a: f64, b: f64) -> f64 {
    match target {
        SeriesTarget::Pf => 1.0,
        SeriesTarget::QQ => a * b,
        SeriesTarget::QoReal | SeriesTarget::QoImag => a,
    }
}

/// κ_p straight from the double sum over eigenvalues, Σ f(a,b) w_a* w_b (i(a−b))ᵖ/p!.
pub fn direct_prefactor(setup: &WvaSetup, target: SeriesTarget, p: u32) -> Complex64 {
    let eig = setup.observable().eigenvalues();
    let w = setup.weights();
    let fact: f64 = (1..=p).map(f64::from).product();
    let mut sum = Complex64::new(0.0, 0.0);
    for (ia, &a) in eig.iter().enumerate() {
        for (ib, &b) in eig.iter().enumerate() {
            let z = Complex64::new(0.0, a - b).powu(p);
            sum += kernel_weight(target, a, b) * w[ia].conj() * w[ib] * z;
        }
    }
    sum / fact
}

fn abs_moment(meter: &MeterModel, k: u32) -> f64 {
    meter.grid().iter().zip(meter.probabilities()).map(|(m, p)| m.abs().powi(k as i32) * p).sum()
}

fn abs_prefactor(setup: &WvaSetup, target: SeriesTarget, p: u32) -> f64 {
    let eig = setup.observable().eigenvalues();
    let w = setup.weights();
    let fact: f64 = (1..=p).map(f64::from).product();
    let mut sum = 0.0;
    for (ia, &a) in eig.iter().enumerate() {
        for (ib, &b) in eig.iter().enumerate() {
            sum += (kernel_weight(target, a, b) * (a - b).powi(p as i32)).abs() * w[ia].norm() * w[ib].norm();
        }
    }
    sum / fact
}

/// e^z − Σ_{k<5} zᵏ/k!
fn exp_tail5(z: Complex64) -> Complex64 {
    if z.norm() < 4.0 {
        let mut term = z.powu(5) / 120.0;
        let mut sum = term;
        let mut k = 5.0;
        while term.norm() > 1e-18 * sum.norm() && k < 200.0 {
            k += 1.0;
            term *= z / k;
            sum += term;
        }
        sum
    } else {
        let head = (0..5u32).fold(Complex64::new(0.0, 0.0), |acc, k| {
            let fact: f64 = (1..=k).map(f64::from).product();
            acc + z.powu(k) / fact
        });
        z.exp() - head
    }
}

/// Exact grid value of the target.
pub fn exact_value(setup: &WvaSetup, g: f64, target: SeriesTarget) -> f64 {
    let k = meter_functions(setup, g).moments(setup.meter());
    match target {
        SeriesTarget::Pf => k.p_f,
        SeriesTarget::QQ => k.qq,
        SeriesTarget::QoReal => k.qo.re,
        SeriesTarget::QoImag => k.qo.im,
    }
}

/// exact(g) − series(g) split into the pointwise exponential tail beyond g⁴
/// and the mismatch between the grid Taylor coefficients and the series.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualParts {
    pub tail: f64,
    pub mismatch: f64,
    /// Σ_p gᵖ⟨|M̂|^k⟩ Σ_{a,b} |f w_a* w_b| |a − b|ᵖ/p!, the rounding scale of
    /// the coefficients.
    pub scale: f64,
}

impl ResidualParts {
    pub fn total(&self) -> f64 {
        self.tail + self.mismatch
    }
}

/// exact(g) − series(g) without forming the difference of two O(1) numbers.
///
/// The exact grid value is split into the grid Taylor polynomial through g⁴
/// plus the pointwise exponential tail, so the residual is the tail plus the
/// (tiny) mismatch between the grid Taylor coefficients and the series ones.
pub fn truncation_residual(setup: &WvaSetup, g: f64, target: SeriesTarget) -> f64 {
    residual_parts(setup, g, target).total()
}

pub fn residual_parts(setup: &WvaSetup, g: f64, target: SeriesTarget) -> ResidualParts {
    let series = expand_moments_series(setup, target);
    let meter = setup.meter();
    let s = target.meter_power();
    let eig = setup.observable().eigenvalues();
    let w = setup.weights();

    let mut mismatch = 0.0;
    let mut scale = 0.0;
    for p in 0..=SERIES_ORDER {
        let kappa = target.project(direct_prefactor(setup, target, p as u32));
        let grid_coeff = kappa * meter.grid_moment(p as u32 + s);
        mismatch += (grid_coeff - series.coeffs[p]) * g.powi(p as i32);
        scale += abs_prefactor(setup, target, p as u32) * abs_moment(meter, p as u32 + s) * g.powi(p as i32);
    }

    let mut tail = Complex64::new(0.0, 0.0);
    for (&m, &prob) in meter.grid().iter().zip(meter.probabilities()) {
        let mut local = Complex64::new(0.0, 0.0);
        for (ia, &a) in eig.iter().enumerate() {
            for (ib, &b) in eig.iter().enumerate() {
                if a == b {
                    continue;
                }
                let z = Complex64::new(0.0, (a - b) * g * m);
                local += kernel_weight(target, a, b) * w[ia].conj() * w[ib] * exp_tail5(z);
            }
        }
        tail += local * prob * m.powi(s as i32);
    }
    ResidualParts {
        tail: target.project(tail),
        mismatch,
        scale,
    }
}

/// Z(δ) = [|A_fi|² − δ Re(Â²)_fi]⟨M̂²⟩, the g² coefficient of p_f.
pub fn z_delta(setup: &WvaSetup) -> f64 {
    let a1 = setup.matrix_element(1);
    let a2 = setup.matrix_element(2);
    (a1.norm_sqr() - setup.delta() * a2.re) * meter_moment(setup.meter(), 2)
}
