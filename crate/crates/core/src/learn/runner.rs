use super::{td_error, AdamState, TdLambdaState};
use crate::envs::{Env, Observation};
use crate::eval::PredictionLog;
use crate::repr::{FeatureVector, Representation, StimTraces};
use crate::rnn::{
    init_params, rtrl_value_gradient, value_head, CellKind, CellShape, Rtrl, Tbptt, WindowBuffer,
};

/// Eligibility-trace decay used by the linear learners.
pub const DEFAULT_LAMBDA: f64 = 0.9;

/// A stream of observations a learner can be trained on.
pub trait ObservationSource {
    fn n_channels(&self) -> usize;
    fn next_observation(&mut self) -> &Observation;
    /// Whether the observation just returned opened a trial.
    fn trial_began(&self) -> bool {
        false
    }
}

impl ObservationSource for Env {
    fn n_channels(&self) -> usize {
        Env::n_channels(self)
    }

    fn next_observation(&mut self) -> &Observation {
        self.step()
    }

    fn trial_began(&self) -> bool {
        Env::trial_began(self)
    }
}

/// Semi-gradient TD(lambda) on a fixed representation.
///
/// At step `t` the learner builds `x_t`, logs `V_t = w · x_t`, and only then
/// updates `w` with the transition `t-1 -> t` using the trace built from
/// `x_{t-1}`. The value fed back to the representation is the logged
/// `V_{t-1}`.
pub fn run_linear_learner<S: ObservationSource + ?Sized>(
    env: &mut S,
    repr: &mut Representation,
    lambda: f64,
    gamma: f64,
    adam: &mut AdamState,
    steps: usize,
) -> PredictionLog {
    let dim = repr.dim();
    let mut td = TdLambdaState::new(dim, lambda, gamma);
    let mut log = PredictionLog::with_capacity(steps);
    let mut x_prev = FeatureVector::dense(0);
    let mut v_prev = 0.0;
    let mut grad = Vec::with_capacity(dim);
    for t in 0..steps {
        let o = env.next_observation();
        let us = o.us;
        let x = repr.features(o, v_prev);
        let v = td.value(x);
        log.push(v, us, env.trial_began());
        if t > 0 {
            let delta = td_error(f64::from(us), v, v_prev, gamma);
            td.step(adam, &x_prev, delta, &mut grad);
        }
        x_prev.copy_from(x);
        v_prev = v;
    }
    log
}

/// Gradient engine for a recurrent learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Tbptt { truncation: usize },
    Rtrl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnnLearnerConfig {
    pub cell: CellKind,
    pub hidden: usize,
    pub engine: Engine,
    pub step_size: f64,
    /// Append stimulating traces of the observation to the cell input.
    pub augment: bool,
    pub trace_decay: f64,
}

struct InputBuilder {
    n: usize,
    traces: Option<StimTraces>,
}

impl InputBuilder {
    fn width(&self) -> usize {
        if self.traces.is_some() {
            2 * self.n
        } else {
            self.n
        }
    }

    fn build(&mut self, o: &Observation, out: &mut [f64]) {
        o.write_channels(&mut out[..self.n]);
        if let Some(tr) = self.traces.as_mut() {
            tr.update(o);
            out[self.n..].copy_from_slice(tr.values());
        }
    }
}

/// Online TD(0) for a recurrent cell with a linear head.
///
/// The cell input is the observation (US included), optionally followed by
/// its stimulating traces. T-BPTT updates every step once its window of
/// `T + 1` inputs is full. RTRL updates every step after the first with
/// `delta_{t-1}` and the Jacobian held from step `t-1`.
pub fn run_rnn_learner<S: ObservationSource + ?Sized>(
    env: &mut S,
    cfg: &RnnLearnerConfig,
    gamma: f64,
    steps: usize,
    seed: u64,
) -> PredictionLog {
    let n = env.n_channels();
    let mut input = InputBuilder {
        n,
        traces: cfg.augment.then(|| StimTraces::new(n, cfg.trace_decay)),
    };
    let mut params = init_params(cfg.cell, input.width(), cfg.hidden, seed);
    let shape: CellShape = params.shape;
    let nh = shape.hidden;
    let mut adam = AdamState::new(shape.n_params(), cfg.step_size);
    let mut grad = vec![0.0; shape.n_params()];
    let mut x = vec![0.0; input.width()];
    let mut state = vec![0.0; shape.state_len()];
    let mut prev = vec![0.0; shape.state_len()];
    let mut log = PredictionLog::with_capacity(steps);

    match cfg.engine {
        Engine::Tbptt { truncation } => {
            let mut window = WindowBuffer::new(truncation, shape.input, shape.state_len());
            let mut engine = Tbptt::new(&shape, truncation);
            let mut rec = crate::rnn::StepRecord::new(&shape);
            for _ in 0..steps {
                let o = env.next_observation();
                let us = o.us;
                input.build(o, &mut x);
                std::mem::swap(&mut prev, &mut state);
                crate::rnn::forward_step(&params, &prev, &x, &mut state, &mut rec);
                log.push(value_head(&params, &state[..nh]), us, env.trial_began());
                window.push(&prev, &x, f64::from(us));
                if window.is_full() {
                    engine.gradient(&params, &window, gamma, &mut grad);
                    adam.apply(&mut params.theta, &grad);
                }
            }
        }
        Engine::Rtrl => {
            let mut rtrl = Rtrl::new(shape);
            let mut v_prev = 0.0;
            for t in 0..steps {
                let o = env.next_observation();
                let us = o.us;
                input.build(o, &mut x);
                std::mem::swap(&mut prev, &mut state);
                rtrl.step(&params, &prev, &x, &mut state);
                let v = value_head(&params, &state[..nh]);
                log.push(v, us, env.trial_began());
                if t > 0 {
                    let delta = td_error(f64::from(us), v, v_prev, gamma);
                    rtrl_value_gradient(&params, rtrl.previous_jacobian(), &prev[..nh], &mut grad);
                    grad.iter_mut().for_each(|g| *g *= -delta);
                    adam.apply(&mut params.theta, &grad);
                }
                v_prev = v;
            }
        }
    }
    log
}
