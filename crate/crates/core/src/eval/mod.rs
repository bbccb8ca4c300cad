//! Scoring predictions against the realized discounted return.

mod profile;
mod returns;

pub use profile::{trial_profile, ProfileRow};
pub use returns::{compute_returns, tail_length, ReturnSeries, DEFAULT_TAIL_EPSILON};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {predictions} predictions vs {returns} returns")]
    LengthMismatch { predictions: usize, returns: usize },
    #[error("need at least 2 runs to aggregate, got {0}")]
    TooFewRuns(usize),
}

/// What a learner emits: its prediction at every step, the US it observed on
/// that step, and the steps on which a trial began.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionLog {
    pub predictions: Vec<f64>,
    pub us: Vec<u8>,
    pub trial_onsets: Vec<u64>,
}

impl PredictionLog {
    pub fn with_capacity(steps: usize) -> Self {
        Self {
            predictions: Vec::with_capacity(steps),
            us: Vec::with_capacity(steps),
            trial_onsets: Vec::new(),
        }
    }

    pub fn push(&mut self, prediction: f64, us: u8, trial_onset: bool) {
        if trial_onset {
            self.trial_onsets.push(self.predictions.len() as u64);
        }
        self.predictions.push(prediction);
        self.us.push(us);
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }
}

/// Score of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run_index: u64,
    pub seed: u64,
    pub config_digest: String,
    pub steps: u64,
    pub msre: f64,
    /// `(bin start step, MSRE within the bin)`.
    pub curve: Vec<(u64, f64)>,
}

/// Running sum of squared return errors. Feeding a log in any chunking gives
/// the same bits as feeding it whole.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MsreAccumulator {
    sum: f64,
    count: u64,
}

impl MsreAccumulator {
    pub fn push(&mut self, prediction: f64, ret: f64) {
        let e = prediction - ret;
        self.sum += e * e;
        self.count += 1;
    }

    pub fn extend(&mut self, predictions: &[f64], returns: &[f64]) {
        for (p, g) in predictions.iter().zip(returns) {
            self.push(*p, *g);
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Mean squared error so far; `NaN` when empty.
    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }
}

/// Mean of `(V_t - G_t)^2` over the scored steps.
pub fn msre(predictions: &[f64], returns: &ReturnSeries) -> Result<f64, EvalError> {
    if predictions.len() != returns.g.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            returns: returns.g.len(),
        });
    }
    let n = returns.scored;
    let mut acc = MsreAccumulator::default();
    acc.extend(&predictions[..n], &returns.g[..n]);
    Ok(acc.mean())
}

/// MSRE in consecutive bins of `bin` scored steps; a trailing partial bin is
/// kept.
pub fn binned_msre(
    predictions: &[f64],
    returns: &ReturnSeries,
    bin: usize,
) -> Result<Vec<(u64, f64)>, EvalError> {
    if predictions.len() != returns.g.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            returns: returns.g.len(),
        });
    }
    let bin = bin.max(1);
    let n = returns.scored;
    Ok((0..n)
        .step_by(bin)
        .map(|start| {
            let end = (start + bin).min(n);
            let mut acc = MsreAccumulator::default();
            acc.extend(&predictions[start..end], &returns.g[start..end]);
            (start as u64, acc.mean())
        })
        .collect())
}

/// Sample mean and standard error (`s / sqrt(n)`).
pub fn mean_and_se(values: &[f64]) -> Result<(f64, f64), EvalError> {
    let n = values.len();
    if n < 2 {
        return Err(EvalError::TooFewRuns(n));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok((mean, (var / nf).sqrt()))
}

/// Mean MSRE across runs with its standard error.
pub fn aggregate_runs(results: &[RunResult]) -> Result<(f64, f64), EvalError> {
    let v: Vec<f64> = results.iter().map(|r| r.msre).collect();
    mean_and_se(&v)
}

/// Scores a whole log: MSRE plus the binned learning curve.
pub fn score_log(
    log: &PredictionLog,
    gamma: f64,
    tail_epsilon: f64,
    bin: usize,
) -> (ReturnSeries, f64, Vec<(u64, f64)>) {
    let returns = compute_returns(&log.us, gamma, tail_epsilon);
    let m = msre(&log.predictions, &returns).expect("log columns have equal length");
    let curve = binned_msre(&log.predictions, &returns, bin).expect("equal length");
    (returns, m, curve)
}
