//! Replicated MLE experiments against the Cramér–Rao floor.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::SimulationConfig;
use crate::dataset::{replica_seed, sample_dataset, GENERATOR};
use crate::error::{McError, Result};
use crate::likelihood::mle_estimate;

pub const MIN_REPLICAS: usize = 30;

/// Below this fraction of 𝓕 the simulated measurement carries no information.
pub const DEGENERATE_INFORMATION: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct CrbSummary {
    pub nu: usize,
    pub n_replicas: usize,
    pub seed: u64,
    pub generator: &'static str,
    pub g_true: f64,
    pub f_classical: f64,
    pub p_f: f64,
    /// F_classical = 0: no estimates are run and no ratio is reported.
    pub degenerate: bool,
    pub mean: Option<f64>,
    pub bias: Option<f64>,
    pub std: Option<f64>,
    /// 1/√(ν F_classical)
    pub crb_std: Option<f64>,
    /// std / crb_std
    pub ratio: Option<f64>,
    /// Successes over all ν·R trials.
    pub success_fraction: f64,
    /// (success_fraction − p_f) in units of the pooled binomial σ.
    pub success_z: f64,
    /// Largest per-replica binomial z-score.
    pub max_replica_z: f64,
    pub boundary_hits: usize,
    pub estimates: Vec<f64>,
}

struct Replica {
    g_hat: f64,
    successes: usize,
    at_boundary: bool,
}

pub fn crb_report(config: &SimulationConfig, nu: usize, n_replicas: usize, seed: u64) -> Result<CrbSummary> {
    if n_replicas < MIN_REPLICAS {
        return Err(McError::TooFewReplicas {
            found: n_replicas,
            min: MIN_REPLICAS,
        });
    }
    if nu == 0 {
        return Err(McError::EmptyDataset);
    }
    let setup = config.setup();
    let g = config.g_true();
    let f_classical = config.classical_fisher()?;
    let qfi = wva_core::qfi_coupling(setup.psi_i(), setup.observable(), setup.meter());
    let model = config.outcome_model(g);
    let p_f = 1.0 - model.probabilities[model.failure_index()];
    let degenerate = !(f_classical > DEGENERATE_INFORMATION * qfi);

    let mut summary = CrbSummary {
        nu,
        n_replicas,
        seed,
        generator: GENERATOR,
        g_true: g,
        f_classical,
        p_f,
        degenerate,
        mean: None,
        bias: None,
        std: None,
        crb_std: None,
        ratio: None,
        success_fraction: 0.0,
        success_z: 0.0,
        max_replica_z: 0.0,
        boundary_hits: 0,
        estimates: Vec::new(),
    };
    if degenerate {
        return Ok(summary);
    }

    let bracket = config.default_bracket(g);
    let replicas: Vec<Replica> = (0..n_replicas)
        .into_par_iter()
        .map(|r| {
            let data = sample_dataset(config, nu, replica_seed(seed, r))?;
            let mle = mle_estimate(&data, bracket)?;
            Ok(Replica {
                g_hat: mle.g_hat,
                successes: data.successes(),
                at_boundary: mle.at_boundary,
            })
        })
        .collect::<Result<_>>()?;

    let n = n_replicas as f64;
    let estimates: Vec<f64> = replicas.iter().map(|r| r.g_hat).collect();
    let mean = estimates.iter().sum::<f64>() / n;
    let var = estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let crb_std = 1.0 / (nu as f64 * f_classical).sqrt();
    let total = replicas.iter().map(|r| r.successes).sum::<usize>() as f64;
    let sigma = |trials: f64| (p_f * (1.0 - p_f) / trials).sqrt().max(f64::MIN_POSITIVE);
    summary.success_fraction = total / (n * nu as f64);
    summary.success_z = (summary.success_fraction - p_f) / sigma(n * nu as f64);
    summary.max_replica_z = replicas
        .iter()
        .map(|r| ((r.successes as f64 / nu as f64 - p_f) / sigma(nu as f64)).abs())
        .fold(0.0, f64::max);
    summary.boundary_hits = replicas.iter().filter(|r| r.at_boundary).count();
    summary.mean = Some(mean);
    summary.bias = Some(mean - g);
    summary.std = Some(var.sqrt());
    summary.crb_std = Some(crb_std);
    summary.ratio = Some(var.sqrt() / crb_std);
    summary.estimates = estimates;
    Ok(summary)
}

/// crb_report at each ν, sharing the master seed.
pub fn crb_curve(config: &SimulationConfig, nus: &[usize], n_replicas: usize, seed: u64) -> Result<Vec<CrbSummary>> {
    nus.iter().map(|&nu| crb_report(config, nu, n_replicas, seed)).collect()
}
