//! Interchangeable evaluators of the qubit information budget.

use serde::{Deserialize, Serialize};

use super::{fps_total, qubit_closed_forms, FisherReport};
use crate::error::Result;
use crate::protocol::WvaSetup;
use crate::quantum::meter::{DEFAULT_GRID_POINTS, DEFAULT_HALF_WIDTH_SIGMAS};
use crate::quantum::gaussian_meter;
use crate::registry::{Named, Registry};

/// Qubit with Â = σ_z, ψ_i = bloch(θ_i, 0), ψ_f = bloch(θ_f, φ) and a
/// Gaussian meter of spread Δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitScenario {
    pub theta_i: f64,
    pub theta_f: f64,
    pub phi: f64,
    pub delta: f64,
}

impl QubitScenario {
    pub fn optimal(theta: f64, delta: f64) -> Self {
        Self {
            theta_i: theta,
            theta_f: theta,
            phi: std::f64::consts::PI,
            delta,
        }
    }
}

pub trait FisherEngine: Named + Send + Sync {
    fn evaluate(&self, scenario: &QubitScenario, g_delta: f64) -> Result<FisherReport>;
}

/// Exact kernels on a discretized Gaussian meter.
#[derive(Debug, Clone, Copy)]
pub struct GridEngine {
    pub n_points: usize,
    pub half_width: f64,
}

impl Default for GridEngine {
    fn default() -> Self {
        Self {
            n_points: DEFAULT_GRID_POINTS,
            half_width: DEFAULT_HALF_WIDTH_SIGMAS,
        }
    }
}

impl Named for GridEngine {
    fn name(&self) -> &'static str {
        "grid"
    }
}

impl FisherEngine for GridEngine {
    fn evaluate(&self, s: &QubitScenario, g_delta: f64) -> Result<FisherReport> {
        let meter = gaussian_meter(s.delta, self.n_points, self.half_width)?;
        let setup = WvaSetup::qubit(s.theta_i, s.theta_f, s.phi, meter)?;
        fps_total(&setup, g_delta / s.delta)
    }
}

/// Analytic qubit formulas.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedFormEngine;

impl Named for ClosedFormEngine {
    fn name(&self) -> &'static str {
        "closed_form"
    }
}

impl FisherEngine for ClosedFormEngine {
    fn evaluate(&self, s: &QubitScenario, g_delta: f64) -> Result<FisherReport> {
        Ok(qubit_closed_forms(s.theta_i, s.theta_f, s.phi, g_delta, s.delta))
    }
}

pub fn engine_registry() -> Registry<dyn FisherEngine> {
    let mut reg: Registry<dyn FisherEngine> = Registry::new("engine");
    reg.register(Box::new(GridEngine::default()));
    reg.register(Box::new(ClosedFormEngine));
    reg
}
