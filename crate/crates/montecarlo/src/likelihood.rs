//! Log-likelihood of a trial record and its maximizer in g.

use serde::Serialize;

use crate::config::SimulationConfig;
use crate::dataset::{ExperimentDataset, Histogram};
use crate::error::{McError, Result};

pub const PROBABILITY_FLOOR: f64 = 1e-300;
/// Golden-section stopping width relative to the bracket.
pub const GOLDEN_TOLERANCE: f64 = 1e-6;
pub const NEWTON_STEPS: usize = 5;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MleResult {
    pub g_hat: f64,
    pub loglik_at_max: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
    /// The maximum sits on a bracket end, so the bracket may be too small.
    pub at_boundary: bool,
}

/// ln L(g) = Σ_k n_k ln max(P_k(g), floor), counts grouped by outcome.
struct Objective<'a> {
    config: &'a SimulationConfig,
    hist: Histogram,
}

impl Objective<'_> {
    fn loglik(&self, g: f64) -> Result<f64> {
        let model = self.config.outcome_model(g);
        let mut total = 0.0;
        for (k, (&n, &p)) in self.hist.counts.iter().zip(&model.probabilities).enumerate() {
            if n == 0 {
                continue;
            }
            let term = n as f64 * p.max(PROBABILITY_FLOOR).ln();
            if !term.is_finite() {
                return Err(McError::NonFinite {
                    trial: self.hist.first[k],
                    g,
                });
            }
            total += term;
        }
        Ok(total)
    }

    /// Σ_k n_k (dP_k/dg)/P_k
    fn score(&self, g: f64) -> f64 {
        let model = self.config.outcome_model(g);
        self.hist
            .counts
            .iter()
            .zip(model.probabilities.iter().zip(&model.derivatives))
            .filter(|(&n, _)| n > 0)
            .map(|(&n, (&p, &dp))| n as f64 * dp / p.max(PROBABILITY_FLOOR))
            .sum()
    }
}

pub fn log_likelihood(dataset: &ExperimentDataset, g: f64) -> Result<f64> {
    if dataset.nu() == 0 {
        return Err(McError::EmptyDataset);
    }
    Objective {
        config: &dataset.config,
        hist: dataset.histogram()?,
    }
    .loglik(g)
}

/// Golden-section search on ln L over the bracket, then Newton steps on the
/// score. Newton steps that leave the bracket or lower ln L are rejected.
pub fn mle_estimate(dataset: &ExperimentDataset, bracket: (f64, f64)) -> Result<MleResult> {
    if dataset.nu() == 0 {
        return Err(McError::EmptyDataset);
    }
    let (lo, hi) = bracket;
    let alias = dataset.config.setup().alias_coupling();
    if !(lo >= 0.0 && lo < hi && hi < alias) {
        return Err(McError::InvalidBracket { lo, hi, alias });
    }
    let obj = Objective {
        config: &dataset.config,
        hist: dataset.histogram()?,
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = obj.loglik(c)?;
    let mut fd = obj.loglik(d)?;
    let mut iterations = 0;
    while b - a > GOLDEN_TOLERANCE * (hi - lo) {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = obj.loglik(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = obj.loglik(d)?;
        }
    }
    let (mut g, mut best) = if fc >= fd { (c, fc) } else { (d, fd) };

    let h = 1e-4 * (hi - lo);
    for _ in 0..NEWTON_STEPS {
        let s = obj.score(g);
        let ds = (obj.score(g + h) - obj.score(g - h)) / (2.0 * h);
        if !(ds < 0.0) || !s.is_finite() {
            break;
        }
        let next = g - s / ds;
        if !(next > lo && next < hi) {
            break;
        }
        let val = obj.loglik(next)?;
        if val < best {
            break;
        }
        iterations += 1;
        g = next;
        best = val;
    }

    let edge = 2.0 * GOLDEN_TOLERANCE * (hi - lo);
    let mut at_boundary = g - lo <= edge || hi - g <= edge;
    for end in [lo, hi] {
        let val = obj.loglik(end)?;
        if val > best {
            g = end;
            best = val;
            at_boundary = true;
        }
    }
    Ok(MleResult {
        g_hat: g,
        loglik_at_max: best,
        iterations,
        bracket,
        at_boundary,
    })
}
