//! Monte Carlo experiments for the post-selected weak measurement. Sampled
//! trial records feed a maximum-likelihood estimate of g whose spread is
//! compared with the Cramér–Rao floor.

// `!(x > y)` is used on purpose so that NaN takes the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod crb;
pub mod dataset;
pub mod error;
pub mod likelihood;

pub use config::{ConfigSnapshot, SimulationConfig};
pub use crb::{crb_curve, crb_report, CrbSummary, MIN_REPLICAS};
pub use dataset::{
    parse_text, replica_seed, sample_dataset, sample_dataset_serial, ExperimentDataset, TrialRecord, CHUNK_TRIALS,
    GENERATOR,
};
pub use error::{McError, Result};
pub use likelihood::{log_likelihood, mle_estimate, MleResult};
