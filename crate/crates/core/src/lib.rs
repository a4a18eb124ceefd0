//! Post-selected weak-measurement metrology.
//!
//! A system prepared in ψ_i couples to a meter through U(g) = exp(−igÂM̂);
//! the meter is read only when the system is found in ψ_f. The crate computes
//! how the quantum Fisher information for g splits between the meter and the
//! post-selection counts, along with weak-coupling expansions.

// `!(x > y)` is used on purpose so that NaN takes the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fisher;
pub mod postselect;
pub mod protocol;
pub mod quantum;
pub mod registry;
pub mod series;

pub use error::{Result, WvaError};
pub use fisher::{
    classical_fisher, fm_bound, fpf_info, fps_total, measurement_fisher, qfi_coupling, qfi_pure, qubit_closed_forms,
    FisherReport, MeasurementSpec,
};
pub use protocol::{WeakValue, WvaSetup};
pub use quantum::{gaussian_meter, HermitianObservable, MeterModel, SystemState};
pub use registry::{Named, Registry};
