//! Regime labels for the optimal post-selection and the Fig. 2 dip.

use std::fmt;

use serde::Serialize;

use super::z_delta;
use crate::error::Result;
use crate::fisher::QubitClosedForm;
use crate::protocol::{optimal_postselection, WvaSetup, WEAK_VALUE_OVERLAP_FLOOR};
use crate::quantum::{meter_moment, HermitianObservable, MeterModel, SystemState};

/// Below this ratio |δ|/(g⟨Â²⟩^{1/2}Δ) the counts dominate.
pub const REGIME_A_THRESHOLD: f64 = 1.0 / 3.0;
/// Above this ratio the meter dominates.
pub const REGIME_B_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ACountsDominated,
    BMeterDominated,
    Crossover,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::ACountsDominated => "a_counts_dominated",
            Regime::BMeterDominated => "b_meter_dominated",
            Regime::Crossover => "crossover",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeLabel {
    pub label: Regime,
    /// Max{|δ|, γ², (δ/γ)²} with γ = g⟨Â²⟩^{1/2}Δ.
    pub epsilon: f64,
    /// |δ|/(g⟨Â²⟩^{1/2}Δ)
    pub ratio: f64,
    /// g|A_w|Δ, absent when the weak value diverges.
    pub weak_value_reach: Option<f64>,
}

/// Classifies the optimal post-selection of `psi_i` at coupling g.
pub fn regime_classify(
    psi_i: &SystemState,
    observable: &HermitianObservable,
    meter: &MeterModel,
    g: f64,
) -> Result<RegimeLabel> {
    let opt = optimal_postselection(psi_i, observable)?;
    let delta = opt.signed_delta.abs();
    let spread = meter_moment(meter, 2).sqrt();
    let gamma = g * opt.a_sq_mean.sqrt() * spread;
    let ratio = if gamma > 0.0 { delta / gamma } else { f64::INFINITY };
    let label = if ratio < REGIME_A_THRESHOLD {
        Regime::ACountsDominated
    } else if ratio > REGIME_B_THRESHOLD {
        Regime::BMeterDominated
    } else {
        Regime::Crossover
    };
    let epsilon = delta.max(gamma * gamma).max(ratio * ratio);
    let weak_value_reach = if delta >= WEAK_VALUE_OVERLAP_FLOOR {
        Some(g * (opt.a_sq_mean / opt.a_mean).abs() * spread)
    } else {
        None
    };
    Ok(RegimeLabel {
        label,
        epsilon,
        ratio,
        weak_value_reach,
    })
}

/// g²|Z(δ)|/(1 − δ²), expected to be O(g²) even as δ → 1.
pub fn eqsepsilon_ratio(setup: &WvaSetup, g: f64) -> Option<f64> {
    let gap = 1.0 - setup.delta().powi(2);
    if gap <= 0.0 {
        return None;
    }
    Some(g * g * z_delta(setup).abs() / gap)
}

/// One θ_f sample of the dip, all information values in units of 𝓕.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DipRow {
    pub theta_f: f64,
    /// cos((θ_i + θ_f)/2)
    pub delta_fi: f64,
    /// cos((θ_f − θ_i)/2)
    pub a_fi: f64,
    pub fm_series: f64,
    pub fm_exact: f64,
    pub fpf_exact: f64,
}

/// Qubit, φ = π: leading-order dip against the exact closed forms.
pub fn dip_profile(theta_i: f64, g_delta: f64, theta_f_grid: &[f64]) -> Vec<DipRow> {
    theta_f_grid
        .iter()
        .map(|&theta_f| {
            let delta_fi = ((theta_i + theta_f) / 2.0).cos();
            let a_fi = ((theta_f - theta_i) / 2.0).cos();
            let d2 = delta_fi * delta_fi;
            let a2 = a_fi * a_fi;
            let den = d2 + g_delta * g_delta * a2;
            let fm_series = if den > 0.0 { d2 * a2 / den } else { 0.0 };
            let exact = QubitClosedForm::new(theta_i, theta_f, std::f64::consts::PI).ratios(g_delta);
            DipRow {
                theta_f,
                delta_fi,
                a_fi,
                fm_series,
                fm_exact: exact.fm_over_qfi,
                fpf_exact: exact.fpf_over_qfi,
            }
        })
        .collect()
}

/// Full width of the dip around the minimum of `ys` at the level halfway
/// between the minimum and `plateau`, by linear interpolation.
pub fn full_width_half_depth(xs: &[f64], ys: &[f64], plateau: f64) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return None;
    }
    let (imin, &ymin) = ys.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
    let level = 0.5 * (plateau + ymin);
    let cross = |i: usize, j: usize| {
        let t = (level - ys[i]) / (ys[j] - ys[i]);
        xs[i] + t * (xs[j] - xs[i])
    };
    let left = (1..=imin).rev().find(|&i| ys[i - 1] >= level).map(|i| cross(i, i - 1))?;
    let right = (imin..xs.len() - 1).find(|&i| ys[i + 1] >= level).map(|i| cross(i, i + 1))?;
    Some(right - left)
}
