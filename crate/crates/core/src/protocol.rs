//! Pre/post-selection kernels.
//!
//! For a coupling U(g) = exp(−i g Â M̂) the post-selected meter is acted on by
//! o(m) = ⟨ψ_f|e^{−igÂm}|ψ_i⟩ and q(m) = m ⟨ψ_f|Â e^{−igÂm}|ψ_i⟩, evaluated
//! exactly through the spectral decomposition of Â.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, WvaError};
use crate::quantum::{bloch_state, sigma_z, spectral_decompose, HermitianObservable, MeterModel, QubitAngles, SystemState};

/// Below this |⟨ψ_f|ψ_i⟩| the weak value is reported as divergent.
pub const WEAK_VALUE_OVERLAP_FLOOR: f64 = 1e-14;

/// Below this p_f the post-selection is treated as impossible. Unit-norm
/// amplitudes carry rounding of order ε, so a smaller p_f is not resolvable.
pub const POSTSELECTION_FLOOR: f64 = 16.0 * f64::EPSILON * f64::EPSILON;

/// A post-selected state with its global phase rotated so that ⟨ψ_f|ψ_i⟩ ≥ 0.
#[derive(Debug, Clone)]
pub struct PostSelection {
    state: SystemState,
    overlap: f64,
    phase: f64,
}

impl PostSelection {
    /// Realigns `psi_f` against `psi_i`.
    pub fn pair(psi_f: &SystemState, psi_i: &SystemState) -> Result<Self> {
        if psi_f.dim() != psi_i.dim() {
            return Err(WvaError::DimensionMismatch {
                expected: psi_i.dim(),
                found: psi_f.dim(),
            });
        }
        let (overlap, phase) = overlap_delta(psi_i, psi_f);
        Ok(Self {
            state: psi_f.with_global_phase(phase),
            overlap,
            phase,
        })
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    /// δ = ⟨ψ_f|ψ_i⟩ ≥ 0 after realignment.
    pub fn overlap(&self) -> f64 {
        self.overlap
    }

    /// Phase α applied as ψ_f ↦ e^{iα} ψ_f.
    pub fn phase(&self) -> f64 {
        self.phase
    }
}

/// Returns |⟨ψ_f|ψ_i⟩| and the phase α = arg⟨ψ_f|ψ_i⟩ that makes
/// ⟨e^{iα}ψ_f|ψ_i⟩ real and non-negative.
pub fn overlap_delta(psi_i: &SystemState, psi_f: &SystemState) -> (f64, f64) {
    let z = psi_f.inner(psi_i);
    let phase = if z.norm() > 0.0 { z.arg() } else { 0.0 };
    (z.norm(), phase)
}

#[derive(Debug, Clone)]
pub struct OptimalPostSelection {
    pub post_selection: PostSelection,
    /// ⟨Â⟩/⟨Â²⟩^{1/2}, signed.
    pub signed_delta: f64,
    pub a_mean: f64,
    pub a_sq_mean: f64,
}

/// |ψ_f^opt⟩ = Â|ψ_i⟩/⟨Â²⟩^{1/2}.
pub fn optimal_postselection(psi_i: &SystemState, observable: &HermitianObservable) -> Result<OptimalPostSelection> {
    if psi_i.dim() != observable.dim() {
        return Err(WvaError::DimensionMismatch {
            expected: observable.dim(),
            found: psi_i.dim(),
        });
    }
    let image = observable.matrix() * psi_i.amplitudes();
    let a_sq_mean = image.norm_squared();
    if a_sq_mean < 1e-24 {
        return Err(WvaError::NullPostSelection);
    }
    let a_mean = psi_i.expectation(observable.matrix());
    let psi_f = SystemState::normalized(image)?;
    Ok(OptimalPostSelection {
        post_selection: PostSelection::pair(&psi_f, psi_i)?,
        signed_delta: a_mean / a_sq_mean.sqrt(),
        a_mean,
        a_sq_mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeakValue {
    Finite { re: f64, im: f64 },
    /// ⟨ψ_f|ψ_i⟩ vanishes (inverted-region boundary).
    Divergent,
}

impl WeakValue {
    pub fn value(&self) -> Option<Complex64> {
        match *self {
            WeakValue::Finite { re, im } => Some(Complex64::new(re, im)),
            WeakValue::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, WeakValue::Divergent)
    }
}

/// A_w = ⟨ψ_f|Â|ψ_i⟩/⟨ψ_f|ψ_i⟩
pub fn weak_value(psi_i: &SystemState, psi_f: &SystemState, observable: &HermitianObservable) -> WeakValue {
    let overlap = psi_f.inner(psi_i);
    if overlap.norm() < WEAK_VALUE_OVERLAP_FLOOR {
        return WeakValue::Divergent;
    }
    let w = psi_f.matrix_element(observable.matrix(), psi_i) / overlap;
    WeakValue::Finite { re: w.re, im: w.im }
}

/// A complete protocol configuration: pre-selection, aligned post-selection,
/// coupling operator and meter.
#[derive(Debug, Clone)]
pub struct WvaSetup {
    psi_i: SystemState,
    post: PostSelection,
    observable: HermitianObservable,
    meter: MeterModel,
    // eigenbasis components ⟨a|ψ_i⟩, ⟨a|ψ_f⟩ and w_a = ⟨ψ_f|a⟩⟨a|ψ_i⟩
    init_components: Vec<Complex64>,
    final_components: Vec<Complex64>,
    weights: Vec<Complex64>,
}

impl WvaSetup {
    pub fn new(psi_i: SystemState, psi_f: &SystemState, observable: HermitianObservable, meter: MeterModel) -> Result<Self> {
        if psi_i.dim() != observable.dim() {
            return Err(WvaError::DimensionMismatch {
                expected: observable.dim(),
                found: psi_i.dim(),
            });
        }
        let post = PostSelection::pair(psi_f, &psi_i)?;
        let init: Vec<Complex64> = observable.to_eigenbasis(psi_i.amplitudes()).iter().copied().collect();
        let fin: Vec<Complex64> = observable
            .to_eigenbasis(post.state().amplitudes())
            .iter()
            .copied()
            .collect();
        let weights = init.iter().zip(&fin).map(|(c, f)| f.conj() * c).collect();
        Ok(Self {
            psi_i,
            post,
            observable,
            meter,
            init_components: init,
            final_components: fin,
            weights,
        })
    }

    /// Qubit with Â = σ_z, ψ_i = bloch(θ_i, 0), ψ_f = bloch(θ_f, φ).
    pub fn qubit(theta_i: f64, theta_f: f64, phi: f64, meter: MeterModel) -> Result<Self> {
        let psi_i = bloch_state(QubitAngles::new(theta_i, 0.0));
        let psi_f = bloch_state(QubitAngles::new(theta_f, phi));
        Self::new(psi_i, &psi_f, spectral_decompose(&sigma_z())?, meter)
    }

    /// Qubit post-selected on ψ_f^opt = σ_z ψ_i, i.e. θ_f = θ_i, φ = π.
    pub fn qubit_optimal(theta: f64, meter: MeterModel) -> Result<Self> {
        Self::qubit(theta, theta, std::f64::consts::PI, meter)
    }

    pub fn psi_i(&self) -> &SystemState {
        &self.psi_i
    }

    pub fn psi_f(&self) -> &SystemState {
        self.post.state()
    }

    pub fn post_selection(&self) -> &PostSelection {
        &self.post
    }

    pub fn observable(&self) -> &HermitianObservable {
        &self.observable
    }

    pub fn meter(&self) -> &MeterModel {
        &self.meter
    }

    /// δ = ⟨ψ_f|ψ_i⟩, real and non-negative.
    pub fn delta(&self) -> f64 {
        self.post.overlap()
    }

    pub fn weak_value(&self) -> WeakValue {
        weak_value(&self.psi_i, self.psi_f(), &self.observable)
    }

    /// (Âⁿ)_fi = ⟨ψ_f|Âⁿ|ψ_i⟩ with the aligned ψ_f.
    pub fn matrix_element(&self, n: u32) -> Complex64 {
        self.observable
            .eigenvalues()
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * a.powi(n as i32))
            .sum()
    }

    /// w_a = ⟨ψ_f|a⟩⟨a|ψ_i⟩ in eigenvalue order.
    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// ⟨ψ_i|Âⁿ|ψ_i⟩
    pub fn initial_moment(&self, n: u32) -> f64 {
        self.observable
            .eigenvalues()
            .iter()
            .zip(&self.init_components)
            .map(|(a, c)| c.norm_sqr() * a.powi(n as i32))
            .sum()
    }

    /// Phase-aliasing limit π/(a_range · m_max) of the grid model.
    pub fn alias_coupling(&self) -> f64 {
        let range = self.observable.spectral_range().max(f64::MIN_POSITIVE);
        std::f64::consts::PI / (range * self.meter.max_abs_m())
    }

    /// Natural finite-difference step 1e-5/(a_max·Δ).
    pub fn default_step(&self) -> f64 {
        1e-5 / (self.observable.max_abs_eigenvalue().max(f64::MIN_POSITIVE) * self.meter.delta())
    }
}

/// Meter-space kernels at one coupling value.
#[derive(Debug, Clone)]
pub struct MeterFunctions {
    pub g: f64,
    pub o_values: Vec<Complex64>,
    pub q_values: Vec<Complex64>,
    /// ‖(1 − |ψ_f⟩⟨ψ_f|) e^{−igÂm_j}|ψ_i⟩‖², computed without subtracting from one.
    pub fail_weights: Vec<f64>,
}

/// Grid expectations of the kernels over the initial meter state.
#[derive(Debug, Clone, Copy)]
pub struct KernelMoments {
    pub p_f: f64,
    /// 1 − p_f, accumulated directly from the failure branch.
    pub p_fail: f64,
    /// ⟨Q̂†Q̂⟩
    pub qq: f64,
    /// ⟨Q̂†Ô⟩
    pub qo: Complex64,
}

impl KernelMoments {
    /// dp_f/dg = −2 Im⟨Q̂†Ô⟩
    pub fn dp_f(&self) -> f64 {
        -2.0 * self.qo.im
    }
}

pub fn meter_functions(setup: &WvaSetup, g: f64) -> MeterFunctions {
    let eig = setup.observable.eigenvalues();
    let n = setup.meter.len();
    let mut o_values = Vec::with_capacity(n);
    let mut q_values = Vec::with_capacity(n);
    let mut fail_weights = Vec::with_capacity(n);
    let mut phases = vec![Complex64::new(0.0, 0.0); eig.len()];
    for &m in setup.meter.grid() {
        let mut o = Complex64::new(0.0, 0.0);
        let mut qa = Complex64::new(0.0, 0.0);
        for (k, (&a, w)) in eig.iter().zip(&setup.weights).enumerate() {
            let e = Complex64::from_polar(1.0, -g * a * m);
            phases[k] = e;
            o += w * e;
            qa += w * e * a;
        }
        let fail = setup
            .init_components
            .iter()
            .zip(&setup.final_components)
            .zip(&phases)
            .map(|((c, f), e)| (c * e - o * f).norm_sqr())
            .sum();
        o_values.push(o);
        q_values.push(qa * m);
        fail_weights.push(fail);
    }
    MeterFunctions {
        g,
        o_values,
        q_values,
        fail_weights,
    }
}

impl MeterFunctions {
    pub fn moments(&self, meter: &MeterModel) -> KernelMoments {
        let mut p_f = 0.0;
        let mut p_fail = 0.0;
        let mut qq = 0.0;
        let mut qo = Complex64::new(0.0, 0.0);
        for (((o, q), fail), p) in self
            .o_values
            .iter()
            .zip(&self.q_values)
            .zip(&self.fail_weights)
            .zip(meter.probabilities())
        {
            p_f += o.norm_sqr() * p;
            p_fail += fail * p;
            qq += q.norm_sqr() * p;
            qo += q.conj() * o * p;
        }
        KernelMoments { p_f, p_fail, qq, qo }
    }
}

/// p_f(g) = ⟨Ô†Ô⟩
pub fn postselect_probability(setup: &WvaSetup, g: f64) -> f64 {
    meter_functions(setup, g).moments(&setup.meter).p_f
}

/// Normalized meter state left after a successful post-selection.
#[derive(Debug, Clone)]
pub struct ConditionalMeterState {
    pub amplitudes: Vec<Complex64>,
    pub prob: f64,
}

pub fn conditional_meter_state(setup: &WvaSetup, g: f64) -> Result<ConditionalMeterState> {
    let f = meter_functions(setup, g);
    let p_f = f.moments(&setup.meter).p_f;
    if !(p_f > POSTSELECTION_FLOOR) {
        return Err(WvaError::PostSelectionImpossible { p_f });
    }
    let mut amplitudes: Vec<Complex64> = f
        .o_values
        .iter()
        .zip(setup.meter.amplitudes())
        .map(|(o, phi)| o * phi)
        .collect();
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amplitudes.iter_mut().for_each(|a| *a /= norm);
    Ok(ConditionalMeterState {
        amplitudes,
        prob: p_f.min(1.0),
    })
}

/// (|a⟩ + ε|b⟩)/√(1 + ε²) for orthogonal |a⟩, |b⟩.
pub fn near_eigenstate_fixture(a: &SystemState, b: &SystemState, epsilon: f64) -> Result<SystemState> {
    if a.dim() != b.dim() {
        return Err(WvaError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let overlap = b.inner(a).norm();
    if overlap > 1e-12 {
        return Err(WvaError::NotOrthogonal { overlap });
    }
    let v: DVector<Complex64> = a.amplitudes() + b.amplitudes().scale(epsilon);
    SystemState::new(v.unscale((1.0 + epsilon * epsilon).sqrt()))
}
