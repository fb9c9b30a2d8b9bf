//! Instance generation and the preset experiments.

pub mod experiments;
pub mod instance;
pub mod rng;

pub use experiments::{run_experiment, Algorithm, ExperimentResult, Overrides, Preset, RunSummary};
pub use instance::{add_noise_snr, generate_instance, measured_snr_db, rmse, GeneratedInstance, InstanceSpec};
pub use rng::{SampleRng, Stream};
