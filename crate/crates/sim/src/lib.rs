//! Monte Carlo frame-error-rate harness for non-binary quantum CSS LDPC
//! codes: sweeps, trap accounting, reproducible CSV output and replayable
//! captures of trapped trials.

pub mod capture;
pub mod config;
pub mod run;
pub mod stats;

pub use capture::Capture;
pub use config::{CodeSource, ConfigError, ConfigLayer, NoiseAxis, RunConfig};
pub use run::{load_code, replay, run_point, run_sweep, run_sweep_on, Pipeline, SimError, SweepResult, TrialRecord};
pub use stats::{hashing_bound, wilson, PointStats, Terminal};
