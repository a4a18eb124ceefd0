//! The finite system Hilbert space and the discretized meter.

pub mod meter;
pub mod observable;
pub mod state;

pub use meter::{gaussian_meter, meter_moment, GaussianMoments, MeterModel, MomentProvider};
pub use observable::{spectral_decompose, HermitianObservable};
pub use state::{bloch_state, sigma_x, sigma_y, sigma_z, QubitAngles, SystemState};
