//! Configured experiments, parameter sweeps and their CSV outputs.
//!
//! Output files (UTF-8, comma separated, header row):
//!
//! * `runs.csv`: `config_digest, problem, method, seed, steps, msre`
//! * `curves.csv`: `config_digest, seed, bin_start, bin_msre`
//! * `profiles.csv`: `config_digest, seed, trial, offset, us, cs*, d*, prediction, return`
//! * `sweep.csv`: swept keys, `config_digest, mean_msre, se, selected`
//!
//! `seed` is the derived per-run seed, not the master seed.

mod aggregate;
mod config;
mod run;
mod sweep;

pub use aggregate::{aggregate_dir, AggregateRow};
pub use config::{
    parse_flat, write_flat, ConfigError, ExperimentConfig, FlatConfig, MethodConfig, ProfileSpec,
};
pub use run::{run_experiment, run_log, run_one, write_outputs, write_profiles, RunOutput};
pub use sweep::{select_best, sweep, write_sweep, SweepOutcome, SweepRow, SweepSpec};
