use num_complex::Complex64;
use serde::Serialize;
use wva_core::fisher::OutcomeModel;
use wva_core::{measurement_fisher, MeasurementSpec, WvaSetup};

use crate::error::{McError, Result};

/// What is simulated: the setup, the true coupling and the meter readout.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    setup: WvaSetup,
    g_true: f64,
    measurement: MeasurementSpec,
}

impl SimulationConfig {
    pub fn new(setup: WvaSetup, g_true: f64, measurement: MeasurementSpec) -> Result<Self> {
        if !g_true.is_finite() || g_true < 0.0 || g_true >= setup.alias_coupling() {
            return Err(McError::InvalidCoupling(g_true));
        }
        Ok(Self {
            setup,
            g_true,
            measurement,
        })
    }

    pub fn setup(&self) -> &WvaSetup {
        &self.setup
    }

    pub fn g_true(&self) -> f64 {
        self.g_true
    }

    pub fn measurement(&self) -> MeasurementSpec {
        self.measurement
    }

    pub fn outcome_model(&self, g: f64) -> OutcomeModel {
        self.measurement.strategy().outcome_model(&self.setup, g)
    }

    /// Classical Fisher information of the simulated measurement at g_true.
    pub fn classical_fisher(&self) -> Result<f64> {
        Ok(measurement_fisher(&self.setup, self.g_true, self.measurement)?)
    }

    /// [0, min(3·guess, 0.9·g_alias)]
    pub fn default_bracket(&self, guess: f64) -> (f64, f64) {
        let cap = 0.9 * self.setup.alias_coupling();
        let hi = if guess > 0.0 { (3.0 * guess).min(cap) } else { cap };
        (0.0, hi)
    }

    pub fn snapshot(&self) -> ConfigSnapshot {
        let pairs = |v: &[Complex64]| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
        let obs = self.setup.observable().matrix();
        let meter = self.setup.meter();
        ConfigSnapshot {
            psi_i: pairs(self.setup.psi_i().amplitudes().as_slice()),
            psi_f: pairs(self.setup.psi_f().amplitudes().as_slice()),
            observable: (0..obs.nrows())
                .map(|r| (0..obs.ncols()).map(|c| [obs[(r, c)].re, obs[(r, c)].im]).collect())
                .collect(),
            meter_delta: meter.delta(),
            meter_points: meter.len(),
            meter_max_abs_m: meter.max_abs_m(),
            g_true: self.g_true,
            measurement: self.measurement,
        }
    }
}

/// Serializable echo of a [`SimulationConfig`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigSnapshot {
    pub psi_i: Vec<[f64; 2]>,
    pub psi_f: Vec<[f64; 2]>,
    pub observable: Vec<Vec<[f64; 2]>>,
    pub meter_delta: f64,
    pub meter_points: usize,
    pub meter_max_abs_m: f64,
    pub g_true: f64,
    pub measurement: MeasurementSpec,
}
