//! Benchmarks and learners for online multi-step prediction in partially
//! observable streams.
//!
//! Three conditioning-style problems ([`envs`]) emit binary stimulus vectors.
//! A learner builds an agent state from that stream, either with a fixed
//! construction ([`repr`]) or a recurrent cell trained online ([`rnn`]), and
//! predicts the discounted sum of future US values with semi-gradient TD
//! ([`learn`]). [`eval`] scores predictions against the realized return and
//! [`harness`] drives configured experiments and parameter sweeps.

pub mod envs;
pub mod eval;
pub mod harness;
pub mod learn;
pub mod repr;
pub mod rng;
pub mod rnn;

pub use envs::{Env, EnvConfig, Observation};
pub use eval::{PredictionLog, RunResult};
pub use harness::{ExperimentConfig, SweepSpec};
