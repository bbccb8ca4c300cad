//! Single-layer recurrent cells with a linear value head, and the two
//! gradient engines used to train them online.
//!
//! # Parameter layout
//!
//! All parameters live in one flat vector. Each gate owns `hidden` rows of
//! length `input + hidden + 1`, laid out as `[W_x row | W_h row | bias]`, so
//! that a gate pre-activation is a dot product with `[x; h_prev; 1]`. Gates
//! are stored in the order
//!
//! * vanilla: `candidate`
//! * LSTM: `input, forget, candidate, output`
//! * GRU: `update, reset, candidate`
//!
//! followed by the head `w_out` (`hidden` entries) and `b_out`.
//!
//! The recurrent state is `h` for vanilla and GRU cells and `[h; c]` for the
//! LSTM.

mod cell;
mod rtrl;
mod tbptt;

pub use cell::{backward_step, forward_step, StepRecord};
pub use rtrl::{rtrl_propagate, rtrl_value_gradient, Rtrl};
pub use tbptt::{tbptt_gradient, Tbptt, WindowBuffer};

use rand::Rng as _;

use crate::rng::{seeded_rng, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellKind {
    Vanilla,
    Lstm,
    Gru,
}

impl CellKind {
    pub fn name(self) -> &'static str {
        match self {
            CellKind::Vanilla => "vanilla",
            CellKind::Lstm => "lstm",
            CellKind::Gru => "gru",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "vanilla" | "rnn" => Some(Self::Vanilla),
            "lstm" => Some(Self::Lstm),
            "gru" => Some(Self::Gru),
            _ => None,
        }
    }

    pub fn gates(self) -> usize {
        match self {
            CellKind::Vanilla => 1,
            CellKind::Lstm => 4,
            CellKind::Gru => 3,
        }
    }
}

pub(crate) mod gate {
    pub const LSTM_I: usize = 0;
    pub const LSTM_F: usize = 1;
    pub const LSTM_G: usize = 2;
    pub const LSTM_O: usize = 3;
    pub const GRU_Z: usize = 0;
    pub const GRU_R: usize = 1;
    pub const GRU_N: usize = 2;
}

/// Sizes derived from `(kind, input, hidden)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellShape {
    pub kind: CellKind,
    pub input: usize,
    pub hidden: usize,
}

impl CellShape {
    pub fn new(kind: CellKind, input: usize, hidden: usize) -> Self {
        Self {
            kind,
            input,
            hidden,
        }
    }

    /// Length of a gate row: `input + hidden + 1`.
    pub fn row_len(&self) -> usize {
        self.input + self.hidden + 1
    }

    pub fn n_cell_params(&self) -> usize {
        self.kind.gates() * self.hidden * self.row_len()
    }

    pub fn n_params(&self) -> usize {
        self.n_cell_params() + self.hidden + 1
    }

    pub fn state_len(&self) -> usize {
        match self.kind {
            CellKind::Lstm => 2 * self.hidden,
            _ => self.hidden,
        }
    }

    /// Offset of row `unit` of gate `g` in the flat parameter vector.
    pub(crate) fn row(&self, g: usize, unit: usize) -> usize {
        (g * self.hidden + unit) * self.row_len()
    }
}

/// Cell and head parameters in the flat layout described at module level.
#[derive(Debug, Clone, PartialEq)]
pub struct CellParams {
    pub shape: CellShape,
    pub theta: Vec<f64>,
}

impl CellParams {
    pub fn zeros(shape: CellShape) -> Self {
        Self {
            shape,
            theta: vec![0.0; shape.n_params()],
        }
    }

    pub fn cell(&self) -> &[f64] {
        &self.theta[..self.shape.n_cell_params()]
    }

    pub fn w_out(&self) -> &[f64] {
        let n = self.shape.n_cell_params();
        &self.theta[n..n + self.shape.hidden]
    }

    pub fn b_out(&self) -> f64 {
        self.theta[self.shape.n_params() - 1]
    }

    pub fn gate_row(&self, g: usize, unit: usize) -> &[f64] {
        let at = self.shape.row(g, unit);
        &self.theta[at..at + self.shape.row_len()]
    }

    pub fn gate_row_mut(&mut self, g: usize, unit: usize) -> &mut [f64] {
        let at = self.shape.row(g, unit);
        let len = self.shape.row_len();
        &mut self.theta[at..at + len]
    }

    pub fn set_bias(&mut self, g: usize, value: f64) {
        let len = self.shape.row_len();
        for j in 0..self.shape.hidden {
            self.gate_row_mut(g, j)[len - 1] = value;
        }
    }

    pub fn head_mut(&mut self) -> (&mut [f64], &mut f64) {
        let n = self.shape.n_cell_params();
        let (w, b) = self.theta[n..].split_at_mut(self.shape.hidden);
        (w, &mut b[0])
    }
}

/// Fan-based uniform weights `U(-a, a)`, `a = sqrt(6 / (fan_in + fan_out))`
/// with `fan_in = input + hidden` and `fan_out = hidden`; zero biases except
/// an LSTM forget bias of 1; zero head.
pub fn init_params(kind: CellKind, input: usize, hidden: usize, seed: u64) -> CellParams {
    assert!(input >= 1 && hidden >= 1, "cell sizes must be >= 1");
    let shape = CellShape::new(kind, input, hidden);
    let mut p = CellParams::zeros(shape);
    let mut rng = seeded_rng(seed, stream::PARAMS);
    let a = (6.0 / ((input + hidden) + hidden) as f64).sqrt();
    let len = shape.row_len();
    for g in 0..kind.gates() {
        for j in 0..hidden {
            let row = p.gate_row_mut(g, j);
            for w in &mut row[..len - 1] {
                *w = rng.random_range(-a..a);
            }
        }
    }
    if kind == CellKind::Lstm {
        p.set_bias(gate::LSTM_F, 1.0);
    }
    p
}

/// `w_out · h + b_out`.
pub fn value_head(params: &CellParams, h: &[f64]) -> f64 {
    params
        .w_out()
        .iter()
        .zip(h)
        .map(|(w, x)| w * x)
        .sum::<f64>()
        + params.b_out()
}

/// Hidden-state value produced by one cell step.
pub fn cell_forward(params: &CellParams, state_prev: &[f64], input: &[f64]) -> Vec<f64> {
    let mut next = vec![0.0; params.shape.state_len()];
    let mut rec = StepRecord::new(&params.shape);
    forward_step(params, state_prev, input, &mut next, &mut rec);
    next
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
