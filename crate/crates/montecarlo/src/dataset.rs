//! Seeded generation of trial records and their text form.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SimulationConfig;
use crate::error::{McError, Result};

/// Trials per RNG stream.
pub const CHUNK_TRIALS: usize = 1 << 16;

pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9); chunk c of 65536 trials uses seed_from_u64(seed) with set_stream(c)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub postselected: bool,
    /// Grid-cell (or Fourier-mode) index; absent on failure and for counts-only runs.
    pub outcome_index: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct ExperimentDataset {
    pub trials: Vec<TrialRecord>,
    pub seed: u64,
    pub config: SimulationConfig,
}

impl ExperimentDataset {
    pub fn nu(&self) -> usize {
        self.trials.len()
    }

    pub fn successes(&self) -> usize {
        self.trials.iter().filter(|t| t.postselected).count()
    }

    pub fn success_fraction(&self) -> f64 {
        self.successes() as f64 / self.nu().max(1) as f64
    }

    /// Counts per outcome of the measurement model (failure last) and the
    /// first trial that produced each outcome.
    pub fn histogram(&self) -> Result<Histogram> {
        let n_success = self.config.measurement().strategy().success_outcomes(self.config.setup());
        let mut counts = vec![0u64; n_success + 1];
        let mut first = vec![usize::MAX; n_success + 1];
        for (i, t) in self.trials.iter().enumerate() {
            let k = match (t.postselected, t.outcome_index) {
                (false, _) => n_success,
                (true, Some(k)) => k as usize,
                (true, None) => 0,
            };
            if k > n_success || (t.postselected && k == n_success) {
                return Err(McError::OutcomeOutOfRange {
                    index: k,
                    outcomes: n_success,
                });
            }
            counts[k] += 1;
            if first[k] == usize::MAX {
                first[k] = i;
            }
        }
        Ok(Histogram { counts, first })
    }

    /// Header lines `# key: value`, then `index flag outcome` per trial with
    /// `-` for a missing outcome.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let snapshot = serde_json::to_string(&self.config.snapshot()).expect("snapshot serializes");
        writeln!(out, "# generator: {GENERATOR}")?;
        writeln!(out, "# seed: {}", self.seed)?;
        writeln!(out, "# nu: {}", self.nu())?;
        writeln!(out, "# measurement: {}", self.config.measurement())?;
        writeln!(out, "# config: {snapshot}")?;
        for (i, t) in self.trials.iter().enumerate() {
            match t.outcome_index {
                Some(k) => writeln!(out, "{i} {} {k}", u8::from(t.postselected))?,
                None => writeln!(out, "{i} {} -", u8::from(t.postselected))?,
            }
        }
        Ok(())
    }

    /// Reads a text export back against the configuration that produced it.
    pub fn read_text<R: BufRead>(input: R, config: SimulationConfig) -> Result<Self> {
        let parsed = parse_text(input)?;
        let seed: u64 = parsed.header_value("seed")?;
        let nu: usize = parsed.header_value("nu")?;
        if nu != parsed.trials.len() {
            return Err(McError::Mismatch(format!("header ν = {nu}, {} records", parsed.trials.len())));
        }
        let measurement = parsed.header.get("measurement").map(String::as_str).unwrap_or("");
        if measurement != config.measurement().name() {
            return Err(McError::Mismatch(format!("measurement `{measurement}`")));
        }
        Ok(Self {
            trials: parsed.trials,
            seed,
            config,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub first: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ParsedDataset {
    pub header: BTreeMap<String, String>,
    pub trials: Vec<TrialRecord>,
}

impl ParsedDataset {
    fn header_value<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.header
            .get(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| McError::Parse {
                line: 0,
                message: format!("missing or malformed header `{key}`"),
            })
    }
}

pub fn parse_text<R: BufRead>(input: R) -> Result<ParsedDataset> {
    let mut header = BTreeMap::new();
    let mut trials = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let bad = |message: String| McError::Parse { line: n + 1, message };
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest.split_once(':').ok_or_else(|| bad("header without `:`".into()))?;
            header.insert(k.trim().to_string(), v.trim().to_string());
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [idx, flag, outcome] = fields[..] else {
            return Err(bad(format!("expected 3 fields, found {}", fields.len())));
        };
        if idx.parse::<usize>().ok() != Some(trials.len()) {
            return Err(bad(format!("trial index `{idx}` out of sequence")));
        }
        let postselected = match flag {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("flag `{other}`"))),
        };
        let outcome_index = match outcome {
            "-" => None,
            k => Some(k.parse().map_err(|_| bad(format!("outcome `{k}`")))?),
        };
        trials.push(TrialRecord {
            postselected,
            outcome_index,
        });
    }
    Ok(ParsedDataset { header, trials })
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Independent 64-bit seed for replica r, drawn from a stream disjoint from
/// the chunk streams.
pub fn replica_seed(seed: u64, replica: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((1u64 << 63) | replica as u64);
    rng.next_u64()
}

fn sample_chunk(
    dist: Option<&WeightedIndex<f64>>,
    failure: usize,
    records_meter: bool,
    seed: u64,
    chunk: usize,
    len: usize,
) -> Vec<TrialRecord> {
    let fail = TrialRecord {
        postselected: false,
        outcome_index: None,
    };
    let Some(dist) = dist else {
        return vec![fail; len];
    };
    let mut rng = chunk_rng(seed, chunk);
    (0..len)
        .map(|_| {
            let k = dist.sample(&mut rng);
            if k == failure {
                fail
            } else {
                TrialRecord {
                    postselected: true,
                    outcome_index: records_meter.then_some(k as u32),
                }
            }
        })
        .collect()
}

fn sample_impl(config: &SimulationConfig, nu: usize, seed: u64, parallel: bool) -> Result<ExperimentDataset> {
    if nu == 0 {
        return Err(McError::EmptyDataset);
    }
    let model = config.outcome_model(config.g_true());
    let failure = model.failure_index();
    let weights: Vec<f64> = model.probabilities.iter().map(|p| p.max(0.0)).collect();
    // all weight on failure when p_f underflows
    let dist = if weights[..failure].iter().any(|&w| w > 0.0) {
        Some(WeightedIndex::new(&weights).map_err(|e| wva_core::WvaError::InvalidDistribution(e.to_string()))?)
    } else {
        None
    };
    let records_meter = config.measurement().records_meter();
    let n_chunks = nu.div_ceil(CHUNK_TRIALS);
    let len = |c: usize| CHUNK_TRIALS.min(nu - c * CHUNK_TRIALS);
    let chunks: Vec<Vec<TrialRecord>> = if parallel {
        (0..n_chunks)
            .into_par_iter()
            .map(|c| sample_chunk(dist.as_ref(), failure, records_meter, seed, c, len(c)))
            .collect()
    } else {
        (0..n_chunks)
            .map(|c| sample_chunk(dist.as_ref(), failure, records_meter, seed, c, len(c)))
            .collect()
    };
    Ok(ExperimentDataset {
        trials: chunks.concat(),
        seed,
        config: config.clone(),
    })
}

/// ν trials at g_true, generated chunk-parallel.
pub fn sample_dataset(config: &SimulationConfig, nu: usize, seed: u64) -> Result<ExperimentDataset> {
    sample_impl(config, nu, seed, true)
}

/// Same streams walked on the calling thread.
pub fn sample_dataset_serial(config: &SimulationConfig, nu: usize, seed: u64) -> Result<ExperimentDataset> {
    sample_impl(config, nu, seed, false)
}
