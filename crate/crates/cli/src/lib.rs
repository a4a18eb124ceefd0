//! Configuration, run modes and artifact writers behind the `wva` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod runs;

pub use config::{parse_config, Mode, RunConfig};
pub use error::{CliError, Result};
pub use runs::{
    run_montecarlo, run_report, series_check, sweep_fig1, sweep_fig2, Fig1, Fig1Row, Fig2, Fig2Curve, Fig2Row,
    MonteCarloOutput, ReportOutput, SeriesRow,
};

/// Resolves `config` for `mode` and produces the artifact text. The
/// timestamp only enters the Monte Carlo JSON.
pub fn execute(mode: Mode, config: RunConfig, timestamp_unix: u64) -> Result<(RunConfig, String)> {
    let config = config.resolve(mode)?;
    let text = match mode {
        Mode::Report => runs::render_report(&config, &run_report(&config)?),
        Mode::SweepFig1 => runs::render_fig1(&config, &sweep_fig1(&config)?),
        Mode::SweepFig2 => runs::render_fig2(&config, &sweep_fig2(&config)?),
        Mode::SeriesCheck => runs::render_series(&config, &series_check(&config)?),
        Mode::Montecarlo => runs::render_montecarlo(&config, &run_montecarlo(&config)?, timestamp_unix),
    };
    Ok((config, text))
}
