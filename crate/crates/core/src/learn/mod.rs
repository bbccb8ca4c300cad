//! Online semi-gradient TD training loops with ADAM updates.

mod adam;
mod runner;
mod td;

pub use adam::{adam_apply, AdamState};
pub use runner::{
    run_linear_learner, run_rnn_learner, Engine, ObservationSource, RnnLearnerConfig,
    DEFAULT_LAMBDA,
};
pub use td::{linear_td_lambda_step, td_error, TdLambdaState};
