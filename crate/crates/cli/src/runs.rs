//! The five run modes.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use wva_core::fisher::{engine_registry, QubitScenario};
use wva_core::series::{
    expand_moments_series, exact_value, full_width_half_depth, regime_classify, residual_parts, series_fisher,
    RegimeLabel, SeriesFisher, SeriesTarget,
};
use wva_core::{fps_total, measurement_fisher, FisherReport, MeasurementSpec};
use wva_montecarlo::{crb_curve, crb_report, CrbSummary, SimulationConfig, GENERATOR};

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{config_hash, fmt_sig, to_json, Csv};

#[derive(Debug, Clone, Serialize)]
pub struct ReportOutput {
    pub report: FisherReport,
    pub fm_over_qfi: f64,
    pub fpf_over_qfi: f64,
    pub fps_over_qfi: f64,
    pub g: f64,
    /// Classical information of each concrete meter readout plus counts;
    /// null where the readout model is singular.
    pub measurements: BTreeMap<&'static str, Option<f64>>,
    pub series: Option<SeriesFisher>,
    pub regime: Option<RegimeLabel>,
}

pub fn run_report(config: &RunConfig) -> Result<ReportOutput> {
    let setup = config.setup()?;
    let g = config.coupling();
    let report = fps_total(&setup, g)?;
    let measurements = MeasurementSpec::ALL
        .iter()
        .map(|&m| (m.name(), measurement_fisher(&setup, g, m).ok()))
        .collect();
    let variant = config.series_variant.as_deref().unwrap_or("opt");
    let series = series_fisher(&setup, g, variant).ok();
    let regime = regime_classify(setup.psi_i(), setup.observable(), setup.meter(), g).ok();
    Ok(ReportOutput {
        fm_over_qfi: report.fm_over_qfi(),
        fpf_over_qfi: report.fpf_over_qfi(),
        fps_over_qfi: report.fps_over_qfi(),
        report,
        g,
        measurements,
        series,
        regime,
    })
}

pub fn render_report(config: &RunConfig, out: &ReportOutput) -> String {
    to_json(config, serde_json::json!({ "mode": "report", "result": out }))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Fig1Row {
    pub theta_i: f64,
    pub fm_over_qfi: f64,
    pub fpf_over_qfi: f64,
    pub fps_over_qfi: f64,
}

#[derive(Debug, Clone)]
pub struct Fig1 {
    pub rows: Vec<Fig1Row>,
    /// θ_i where fm and fpf cross, by linear interpolation.
    pub crossings: Vec<f64>,
}

/// θ_i = (k + ½)π/n, optimal post-selection at each θ_i.
pub fn sweep_fig1(config: &RunConfig) -> Result<Fig1> {
    let n = config.theta_points.unwrap_or(500);
    let gd = config.g_delta.unwrap_or(0.1);
    let delta = config.meter_delta.unwrap_or(1.0);
    let reg = engine_registry();
    let engine = reg.get(config.engine.as_deref().unwrap_or("grid"))?;
    let mut rows: Vec<Fig1Row> = (0..n)
        .into_par_iter()
        .map(|k| {
            let theta = (k as f64 + 0.5) * PI / n as f64;
            let r = engine.evaluate(&QubitScenario::optimal(theta, delta), gd)?;
            Ok(Fig1Row {
                theta_i: theta,
                fm_over_qfi: r.fm_over_qfi(),
                fpf_over_qfi: r.fpf_over_qfi(),
                fps_over_qfi: r.fps_over_qfi(),
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.theta_i.total_cmp(&b.theta_i));
    let crossings = rows
        .windows(2)
        .filter_map(|w| {
            let d0 = w[0].fm_over_qfi - w[0].fpf_over_qfi;
            let d1 = w[1].fm_over_qfi - w[1].fpf_over_qfi;
            (d0 * d1 <= 0.0 && d0 != d1).then(|| w[0].theta_i + d0 / (d0 - d1) * (w[1].theta_i - w[0].theta_i))
        })
        .collect();
    Ok(Fig1 { rows, crossings })
}

pub fn render_fig1(config: &RunConfig, fig: &Fig1) -> String {
    let mut csv = Csv::new(&["theta_i", "fm_over_qfi", "fpf_over_qfi", "fps_over_qfi"]);
    for r in &fig.rows {
        csv.push(vec![fmt_sig(r.theta_i), fmt_sig(r.fm_over_qfi), fmt_sig(r.fpf_over_qfi), fmt_sig(r.fps_over_qfi)]);
    }
    csv.render(config)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Fig2Row {
    pub theta_f: f64,
    pub g_delta: f64,
    pub fm_over_qfi: f64,
    pub fps_over_qfi: f64,
}

/// Per-gΔ features of a Fig. 2 curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Fig2Curve {
    pub g_delta: f64,
    pub dip_center: f64,
    /// Largest grid spacing next to the dip center.
    pub local_step: f64,
    /// Full width at half depth of fm/(𝓕|A_fi|²), whose plateau is 1.
    pub dip_width: Option<f64>,
    pub fps_argmax: f64,
}

#[derive(Debug, Clone)]
pub struct Fig2 {
    pub rows: Vec<Fig2Row>,
    pub curves: Vec<Fig2Curve>,
}

/// Uniform grid on [0, π] merged with a dense window around 2π/3.
pub fn fig2_grid(config: &RunConfig) -> Vec<f64> {
    let n = config.theta_f_points.unwrap_or(1001);
    let dense = config.dense_points.unwrap_or(0);
    let hw = config.dense_half_width.unwrap_or(0.05);
    let center = 2.0 * PI / 3.0;
    let mut grid: Vec<f64> = (0..n).map(|k| k as f64 * PI / (n - 1) as f64).collect();
    let half = dense / 2;
    if half > 0 {
        grid.extend((0..=2 * half).map(|j| center + (j as f64 - half as f64) * hw / half as f64));
    }
    grid.retain(|t| (0.0..=PI).contains(t));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    grid
}

pub fn sweep_fig2(config: &RunConfig) -> Result<Fig2> {
    let theta_i = config.theta_i.unwrap_or(PI / 3.0);
    let phi = config.phi.unwrap_or(PI);
    let delta = config.meter_delta.unwrap_or(1.0);
    let reg = engine_registry();
    let engine = reg.get(config.engine.as_deref().unwrap_or("grid"))?;
    let grid = fig2_grid(config);
    let list = config.g_delta_list.clone().unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3]);

    let jobs: Vec<(f64, f64)> = list.iter().flat_map(|&gd| grid.iter().map(move |&t| (t, gd))).collect();
    let mut rows: Vec<Fig2Row> = jobs
        .par_iter()
        .map(|&(theta_f, gd)| {
            let s = QubitScenario {
                theta_i,
                theta_f,
                phi,
                delta,
            };
            let r = engine.evaluate(&s, gd)?;
            Ok(Fig2Row {
                theta_f,
                g_delta: gd,
                fm_over_qfi: r.fm_over_qfi(),
                fps_over_qfi: r.fps_over_qfi(),
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.theta_f.total_cmp(&b.theta_f).then(a.g_delta.total_cmp(&b.g_delta)));

    let curves = list
        .iter()
        .map(|&gd| {
            let curve: Vec<&Fig2Row> = rows.iter().filter(|r| r.g_delta == gd).collect();
            let xs: Vec<f64> = curve.iter().map(|r| r.theta_f).collect();
            let shape: Vec<f64> = curve
                .iter()
                .map(|r| r.fm_over_qfi / ((r.theta_f - theta_i) / 2.0).cos().powi(2))
                .collect();
            let imin = (0..curve.len()).min_by(|&a, &b| curve[a].fm_over_qfi.total_cmp(&curve[b].fm_over_qfi)).unwrap_or(0);
            let left = if imin > 0 { xs[imin] - xs[imin - 1] } else { 0.0 };
            let right = if imin + 1 < xs.len() { xs[imin + 1] - xs[imin] } else { 0.0 };
            let argmax = curve
                .iter()
                .max_by(|a, b| a.fps_over_qfi.total_cmp(&b.fps_over_qfi))
                .map_or(f64::NAN, |r| r.theta_f);
            Fig2Curve {
                g_delta: gd,
                dip_center: xs.get(imin).copied().unwrap_or(f64::NAN),
                local_step: left.max(right),
                dip_width: full_width_half_depth(&xs, &shape, 1.0),
                fps_argmax: argmax,
            }
        })
        .collect();
    Ok(Fig2 { rows, curves })
}

pub fn render_fig2(config: &RunConfig, fig: &Fig2) -> String {
    let mut csv = Csv::new(&["theta_f", "g_delta", "fm_over_qfi", "fps_over_qfi"]);
    for r in &fig.rows {
        csv.push(vec![fmt_sig(r.theta_f), fmt_sig(r.g_delta), fmt_sig(r.fm_over_qfi), fmt_sig(r.fps_over_qfi)]);
    }
    csv.render(config)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesRow {
    pub target: SeriesTarget,
    pub g_delta: f64,
    pub exact: f64,
    pub series: f64,
    pub tail: f64,
    pub mismatch: f64,
    /// log₂ of tail(gΔ)/tail(gΔ/2) against the next row, when it is gΔ/2
    /// and both tails are nonzero.
    pub decay_order: Option<f64>,
}

pub fn series_check(config: &RunConfig) -> Result<Vec<SeriesRow>> {
    let setup = config.setup()?;
    let delta = setup.meter().delta();
    let mut list = config.g_delta_list.clone().unwrap_or_default();
    list.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::new();
    for target in SeriesTarget::ALL {
        let coeffs = expand_moments_series(&setup, target);
        let tails: Vec<_> = list.iter().map(|&gd| residual_parts(&setup, gd / delta, target)).collect();
        for (i, &gd) in list.iter().enumerate() {
            let g = gd / delta;
            let decay_order = list
                .get(i + 1)
                .filter(|&&next| (next - gd / 2.0).abs() <= 1e-12 * gd)
                .map(|_| (tails[i].tail / tails[i + 1].tail).abs().log2())
                .filter(|r| r.is_finite());
            rows.push(SeriesRow {
                target,
                g_delta: gd,
                exact: exact_value(&setup, g, target),
                series: coeffs.evaluate(g),
                tail: tails[i].tail,
                mismatch: tails[i].mismatch,
                decay_order,
            });
        }
    }
    Ok(rows)
}

pub fn render_series(config: &RunConfig, rows: &[SeriesRow]) -> String {
    let mut csv = Csv::new(&["target", "g_delta", "exact", "series", "tail", "mismatch", "decay_order"]);
    for r in rows {
        csv.push(vec![
            r.target.name().to_string(),
            fmt_sig(r.g_delta),
            fmt_sig(r.exact),
            fmt_sig(r.series),
            fmt_sig(r.tail),
            fmt_sig(r.mismatch),
            r.decay_order.map(fmt_sig).unwrap_or_default(),
        ]);
    }
    csv.render(config)
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloOutput {
    pub generator: &'static str,
    pub seed: u64,
    pub config_hash: String,
    pub summary: CrbSummary,
    /// crb_report at each ν of `nu_curve`.
    pub curve: Vec<CrbSummary>,
}

pub fn run_montecarlo(config: &RunConfig) -> Result<MonteCarloOutput> {
    let setup = config.setup()?;
    let g = config.coupling();
    let measurement = config.measurement.unwrap_or(MeasurementSpec::MeterEigenbasis);
    let sim = SimulationConfig::new(setup, g, measurement)?;
    let seed = config.seed.unwrap_or(0);
    let replicas = config.replicas.unwrap_or(100);
    let summary = crb_report(&sim, config.nu.unwrap_or(100_000), replicas, seed)?;
    let curve = match &config.nu_curve {
        Some(nus) => crb_curve(&sim, nus, replicas, seed)?,
        None => Vec::new(),
    };
    Ok(MonteCarloOutput {
        generator: GENERATOR,
        seed,
        config_hash: config_hash(config),
        summary,
        curve,
    })
}

pub fn render_montecarlo(config: &RunConfig, out: &MonteCarloOutput, timestamp_unix: u64) -> String {
    to_json(
        config,
        serde_json::json!({ "mode": "montecarlo", "timestamp_unix": timestamp_unix, "result": out }),
    )
}

