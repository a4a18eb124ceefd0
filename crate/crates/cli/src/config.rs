//! Flat JSON run configuration.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use wva_core::fisher::engine_registry;
use wva_core::postselect::postselection_registry;
use wva_core::quantum::{bloch_state, sigma_z, spectral_decompose, QubitAngles};
use wva_core::series::series_registry;
use wva_core::{gaussian_meter, MeasurementSpec, SystemState, WvaSetup};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Report,
    SweepFig1,
    SweepFig2,
    SeriesCheck,
    Montecarlo,
}

/// Every key is optional; [`RunConfig::resolve`] fills the mode's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,

    // qubit with Â = σ_z
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_i: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,

    // general system, amplitudes as [re, im] pairs
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi_i: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi_f: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<Vec<Vec<[f64; 2]>>>,

    /// `optimal`, `initial`, or `explicit` (ψ_f or θ_f given)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub postselection: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub meter_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meter_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meter_half_width: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_delta_list: Option<Vec<f64>>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_f_points: Option<usize>,
    /// Extra θ_f points packed into 2π/3 ± dense_half_width.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_variant: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_curve: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| CliError::ConfigSyntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn check_finite(key: &'static str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !x.is_finite() => Err(CliError::invalid(key, format!("{x} is not finite"))),
        _ => Ok(()),
    }
}

fn check_positive(key: &'static str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::invalid(key, format!("{x} must be positive"))),
        _ => Ok(()),
    }
}

fn amplitudes(key: &'static str, pairs: &[[f64; 2]]) -> Result<DVector<Complex64>> {
    if pairs.iter().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::invalid(key, "non-finite amplitude"));
    }
    Ok(DVector::from_iterator(pairs.len(), pairs.iter().map(|p| Complex64::new(p[0], p[1]))))
}

impl RunConfig {
    /// Validates every key for `mode` and fills the defaults. Runs before any
    /// computation.
    pub fn resolve(mut self, mode: Mode) -> Result<RunConfig> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(CliError::invalid("mode", format!("{m:?} does not match the subcommand")));
            }
        }
        self.mode = Some(mode);

        for (key, v) in [("theta_i", self.theta_i), ("theta_f", self.theta_f), ("phi", self.phi), ("g", self.g)] {
            check_finite(key, v)?;
        }
        check_positive("meter_delta", self.meter_delta)?;
        check_positive("meter_half_width", self.meter_half_width)?;
        check_positive("g_delta", self.g_delta)?;
        check_positive("dense_half_width", self.dense_half_width)?;
        if let Some(g) = self.g {
            if g < 0.0 {
                return Err(CliError::invalid("g", "must be non-negative"));
            }
            if self.g_delta.is_some() {
                return Err(CliError::invalid("g", "give either `g` or `g_delta`"));
            }
        }
        if let Some(list) = &self.g_delta_list {
            if list.is_empty() || list.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(CliError::invalid("g_delta_list", "needs positive finite entries"));
            }
        }

        let general = self.psi_i.is_some() || self.observable.is_some() || self.psi_f.is_some();
        if general {
            if self.theta_i.is_some() || self.theta_f.is_some() || self.phi.is_some() {
                return Err(CliError::invalid("psi_i", "mixes a general state with qubit angles"));
            }
            if self.psi_i.is_none() || self.observable.is_none() {
                return Err(CliError::invalid("observable", "a general system needs both `psi_i` and `observable`"));
            }
            if matches!(mode, Mode::SweepFig1 | Mode::SweepFig2) {
                return Err(CliError::invalid("psi_i", "the figure sweeps are defined for the qubit only"));
            }
        }
        let explicit = self.psi_f.is_some() || self.theta_f.is_some() || self.phi.is_some();
        let rule = match self.postselection.take() {
            Some(r) if r == "explicit" && !explicit => {
                return Err(CliError::invalid("postselection", "`explicit` needs `psi_f` or `theta_f`"));
            }
            Some(r) if r != "explicit" && explicit => {
                return Err(CliError::invalid("postselection", format!("`{r}` conflicts with an explicit ψ_f")));
            }
            Some(r) => r,
            None if explicit => "explicit".to_string(),
            None => "optimal".to_string(),
        };
        if rule != "explicit" {
            postselection_registry()
                .get(&rule)
                .map_err(|e| CliError::invalid("postselection", e.to_string()))?;
        }
        self.postselection = Some(rule);

        if !general {
            self.theta_i.get_or_insert(PI / 3.0);
        }
        if mode == Mode::SweepFig1 && self.postselection.as_deref() != Some("optimal") {
            return Err(CliError::invalid("postselection", "sweep_fig1 uses the optimal post-selection per θ_i"));
        }
        if mode == Mode::SweepFig2 {
            self.phi.get_or_insert(PI);
            if self.postselection.as_deref() != Some("explicit") && self.postselection.as_deref() != Some("optimal") {
                return Err(CliError::invalid("postselection", "sweep_fig2 varies θ_f itself"));
            }
            self.postselection = Some("explicit".into());
        }
        if self.postselection.as_deref() == Some("explicit") && !general {
            let ti = self.theta_i.unwrap_or(PI / 3.0);
            self.theta_f.get_or_insert(ti);
            self.phi.get_or_insert(PI);
        }

        self.meter_delta.get_or_insert(1.0);
        self.meter_points.get_or_insert(wva_core::quantum::meter::DEFAULT_GRID_POINTS);
        self.meter_half_width.get_or_insert(wva_core::quantum::meter::DEFAULT_HALF_WIDTH_SIGMAS);
        if let Some(n) = self.meter_points {
            if n < 3 || n.is_multiple_of(2) {
                return Err(CliError::invalid("meter_points", "must be odd and at least 3"));
            }
        }

        match mode {
            Mode::Report | Mode::Montecarlo => {
                if self.g.is_none() && self.g_delta.is_none() {
                    self.g_delta = Some(0.1);
                }
            }
            Mode::SweepFig1 => {
                self.g_delta.get_or_insert(0.1);
                self.theta_points.get_or_insert(500);
                if self.theta_points == Some(0) {
                    return Err(CliError::invalid("theta_points", "must be positive"));
                }
            }
            Mode::SweepFig2 => {
                self.g_delta_list.get_or_insert_with(|| vec![1e-1, 1e-2, 1e-3]);
                self.theta_f_points.get_or_insert(1001);
                self.dense_points.get_or_insert(2001);
                self.dense_half_width.get_or_insert(0.05);
                if self.theta_f_points.unwrap() < 3 {
                    return Err(CliError::invalid("theta_f_points", "need at least 3"));
                }
            }
            Mode::SeriesCheck => {
                self.g_delta_list.get_or_insert_with(|| {
                    let mut v = vec![3e-2];
                    while *v.last().unwrap() / 2.0 >= 1e-3 * (1.0 - 1e-12) {
                        v.push(v.last().unwrap() / 2.0);
                    }
                    v
                });
                self.series_variant.get_or_insert_with(|| "opt".into());
            }
        }
        if matches!(mode, Mode::SweepFig1 | Mode::SweepFig2) {
            self.engine.get_or_insert_with(|| "grid".into());
        }
        if let Some(e) = &self.engine {
            engine_registry().get(e).map_err(|err| CliError::invalid("engine", err.to_string()))?;
        }
        if let Some(v) = &self.series_variant {
            series_registry().get(v).map_err(|err| CliError::invalid("series_variant", err.to_string()))?;
        }
        if mode == Mode::Montecarlo {
            self.measurement.get_or_insert(MeasurementSpec::MeterEigenbasis);
            self.nu.get_or_insert(100_000);
            self.replicas.get_or_insert(100);
            self.seed.get_or_insert(0);
            if self.nu == Some(0) || self.nu_curve.as_ref().is_some_and(|c| c.contains(&0)) {
                return Err(CliError::invalid("nu", "must be at least 1"));
            }
            if self.replicas.unwrap() < wva_montecarlo::MIN_REPLICAS {
                return Err(CliError::invalid(
                    "replicas",
                    format!("need at least {}", wva_montecarlo::MIN_REPLICAS),
                ));
            }
        }
        // build once so that malformed states fail before any computation
        if !matches!(mode, Mode::SweepFig1 | Mode::SweepFig2) {
            self.setup()?;
        }
        Ok(self)
    }

    pub fn meter(&self) -> Result<wva_core::MeterModel> {
        let meter = gaussian_meter(
            self.meter_delta.unwrap_or(1.0),
            self.meter_points.unwrap_or(wva_core::quantum::meter::DEFAULT_GRID_POINTS),
            self.meter_half_width.unwrap_or(wva_core::quantum::meter::DEFAULT_HALF_WIDTH_SIGMAS),
        )
        .map_err(|e| CliError::invalid("meter_delta", e.to_string()))?;
        Ok(meter)
    }

    /// Coupling g, from `g` or `g_delta`/Δ.
    pub fn coupling(&self) -> f64 {
        match (self.g, self.g_delta) {
            (Some(g), _) => g,
            (None, Some(gd)) => gd / self.meter_delta.unwrap_or(1.0),
            (None, None) => 0.0,
        }
    }

    pub fn setup(&self) -> Result<WvaSetup> {
        let meter = self.meter()?;
        let (psi_i, obs) = match (&self.psi_i, &self.observable) {
            (Some(p), Some(rows)) => {
                let psi = SystemState::new(amplitudes("psi_i", p)?).map_err(|e| CliError::invalid("psi_i", e.to_string()))?;
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(CliError::invalid("observable", "must be a square matrix"));
                }
                let flat: Vec<Complex64> = rows.iter().flatten().map(|p| Complex64::new(p[0], p[1])).collect();
                let m = DMatrix::from_row_slice(n, n, &flat);
                let obs = spectral_decompose(&m).map_err(|e| CliError::invalid("observable", e.to_string()))?;
                (psi, obs)
            }
            _ => {
                let psi = bloch_state(QubitAngles::new(self.theta_i.unwrap_or(PI / 3.0), 0.0));
                (psi, spectral_decompose(&sigma_z())?)
            }
        };
        let rule = self.postselection.as_deref().unwrap_or("optimal");
        let psi_f = if rule == "explicit" {
            match &self.psi_f {
                Some(p) => SystemState::new(amplitudes("psi_f", p)?).map_err(|e| CliError::invalid("psi_f", e.to_string()))?,
                None => bloch_state(QubitAngles::new(
                    self.theta_f.unwrap_or(PI / 3.0),
                    self.phi.unwrap_or(PI),
                )),
            }
        } else {
            postselection_registry().get(rule)?.post_state(&psi_i, &obs)?
        };
        if psi_f.dim() != psi_i.dim() {
            return Err(CliError::invalid("psi_f", "dimension differs from psi_i"));
        }
        Ok(WvaSetup::new(psi_i, &psi_f, obs, meter)?)
    }
}
