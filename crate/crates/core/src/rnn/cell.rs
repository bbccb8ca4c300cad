use super::gate::*;
use super::{axpy, dot, sigmoid, CellKind, CellParams, CellShape};

/// Intermediate values of one forward step, kept for backpropagation and
/// RTRL.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// `[x; h_prev; 1]`.
    pub a: Vec<f64>,
    /// Post-nonlinearity gate values, `gates * hidden`, gate-major.
    pub acts: Vec<f64>,
    /// LSTM: `tanh(c)`. GRU: `[x; r ⊙ h_prev; 1]`. Vanilla: unused.
    pub aux: Vec<f64>,
}

impl StepRecord {
    pub fn new(shape: &CellShape) -> Self {
        let aux = match shape.kind {
            CellKind::Vanilla => 0,
            CellKind::Lstm => shape.hidden,
            CellKind::Gru => shape.row_len(),
        };
        Self {
            a: vec![0.0; shape.row_len()],
            acts: vec![0.0; shape.kind.gates() * shape.hidden],
            aux: vec![0.0; aux],
        }
    }
}

/// One cell step: writes the new state into `next` and the intermediates
/// into `rec`.
pub fn forward_step(
    params: &CellParams,
    prev: &[f64],
    x: &[f64],
    next: &mut [f64],
    rec: &mut StepRecord,
) {
    let s = params.shape;
    let (ni, nh) = (s.input, s.hidden);
    debug_assert_eq!(x.len(), ni);
    debug_assert_eq!(prev.len(), s.state_len());
    let h_prev = &prev[..nh];
    rec.a[..ni].copy_from_slice(x);
    rec.a[ni..ni + nh].copy_from_slice(h_prev);
    rec.a[ni + nh] = 1.0;

    match s.kind {
        CellKind::Vanilla => {
            for j in 0..nh {
                let h = dot(params.gate_row(0, j), &rec.a).tanh();
                rec.acts[j] = h;
                next[j] = h;
            }
        }
        CellKind::Lstm => {
            let c_prev = &prev[nh..];
            for j in 0..nh {
                let i = sigmoid(dot(params.gate_row(LSTM_I, j), &rec.a));
                let f = sigmoid(dot(params.gate_row(LSTM_F, j), &rec.a));
                let g = dot(params.gate_row(LSTM_G, j), &rec.a).tanh();
                let o = sigmoid(dot(params.gate_row(LSTM_O, j), &rec.a));
                let c = f * c_prev[j] + i * g;
                let tc = c.tanh();
                rec.acts[LSTM_I * nh + j] = i;
                rec.acts[LSTM_F * nh + j] = f;
                rec.acts[LSTM_G * nh + j] = g;
                rec.acts[LSTM_O * nh + j] = o;
                rec.aux[j] = tc;
                next[j] = o * tc;
                next[nh + j] = c;
            }
        }
        CellKind::Gru => {
            rec.aux[..ni].copy_from_slice(x);
            rec.aux[ni + nh] = 1.0;
            for j in 0..nh {
                let z = sigmoid(dot(params.gate_row(GRU_Z, j), &rec.a));
                let r = sigmoid(dot(params.gate_row(GRU_R, j), &rec.a));
                rec.acts[GRU_Z * nh + j] = z;
                rec.acts[GRU_R * nh + j] = r;
                rec.aux[ni + j] = r * h_prev[j];
            }
            for j in 0..nh {
                let n = dot(params.gate_row(GRU_N, j), &rec.aux).tanh();
                let z = rec.acts[GRU_Z * nh + j];
                rec.acts[GRU_N * nh + j] = n;
                next[j] = (1.0 - z) * h_prev[j] + z * n;
            }
        }
    }
}

/// Backpropagates `d_state = dL/d(state_t)` through one step.
///
/// Accumulates cell-parameter gradients into `grad_cell` (length
/// `n_cell_params`) and, when `d_prev` is given, writes `dL/d(state_{t-1})`
/// into it. `dpre` is scratch space.
pub fn backward_step(
    params: &CellParams,
    prev: &[f64],
    rec: &StepRecord,
    d_state: &[f64],
    grad_cell: &mut [f64],
    d_prev: Option<&mut [f64]>,
    dpre: &mut Vec<f64>,
) {
    let s = params.shape;
    let (ni, nh) = (s.input, s.hidden);
    let len = s.row_len();
    dpre.clear();
    dpre.resize(s.kind.gates() * nh, 0.0);
    let dh = &d_state[..nh];
    let h_prev = &prev[..nh];

    match s.kind {
        CellKind::Vanilla => {
            for j in 0..nh {
                let h = rec.acts[j];
                dpre[j] = dh[j] * (1.0 - h * h);
            }
        }
        CellKind::Lstm => {
            let dc = &d_state[nh..];
            let c_prev = &prev[nh..];
            for j in 0..nh {
                let i = rec.acts[LSTM_I * nh + j];
                let f = rec.acts[LSTM_F * nh + j];
                let g = rec.acts[LSTM_G * nh + j];
                let o = rec.acts[LSTM_O * nh + j];
                let tc = rec.aux[j];
                let dct = dc[j] + dh[j] * o * (1.0 - tc * tc);
                dpre[LSTM_I * nh + j] = dct * g * i * (1.0 - i);
                dpre[LSTM_F * nh + j] = dct * c_prev[j] * f * (1.0 - f);
                dpre[LSTM_G * nh + j] = dct * i * (1.0 - g * g);
                dpre[LSTM_O * nh + j] = dh[j] * tc * o * (1.0 - o);
            }
        }
        CellKind::Gru => {
            for j in 0..nh {
                let z = rec.acts[GRU_Z * nh + j];
                let n = rec.acts[GRU_N * nh + j];
                dpre[GRU_Z * nh + j] = dh[j] * (n - h_prev[j]) * z * (1.0 - z);
                dpre[GRU_N * nh + j] = dh[j] * z * (1.0 - n * n);
            }
            // d(r ⊙ h_prev) through the candidate's recurrent weights.
            for l in 0..nh {
                let mut drh = 0.0;
                for j in 0..nh {
                    drh += params.gate_row(GRU_N, j)[ni + l] * dpre[GRU_N * nh + j];
                }
                let r = rec.acts[GRU_R * nh + l];
                dpre[GRU_R * nh + l] = drh * h_prev[l] * r * (1.0 - r);
            }
        }
    }

    for g in 0..s.kind.gates() {
        let input = if s.kind == CellKind::Gru && g == GRU_N {
            &rec.aux
        } else {
            &rec.a
        };
        for j in 0..nh {
            let d = dpre[g * nh + j];
            if d != 0.0 {
                let at = s.row(g, j);
                axpy(d, input, &mut grad_cell[at..at + len]);
            }
        }
    }

    let Some(d_prev) = d_prev else { return };
    let dhp = &mut d_prev[..nh];
    dhp.fill(0.0);
    for g in 0..s.kind.gates() {
        for j in 0..nh {
            let d = dpre[g * nh + j];
            if d == 0.0 {
                continue;
            }
            let w_h = &params.gate_row(g, j)[ni..ni + nh];
            if s.kind == CellKind::Gru && g == GRU_N {
                // Candidate sees r ⊙ h_prev.
                for l in 0..nh {
                    dhp[l] += d * w_h[l] * rec.acts[GRU_R * nh + l];
                }
            } else {
                axpy(d, w_h, dhp);
            }
        }
    }
    match s.kind {
        CellKind::Vanilla => {}
        CellKind::Lstm => {
            let dc = &d_state[nh..];
            for j in 0..nh {
                let o = rec.acts[LSTM_O * nh + j];
                let tc = rec.aux[j];
                let dct = dc[j] + dh[j] * o * (1.0 - tc * tc);
                d_prev[nh + j] = dct * rec.acts[LSTM_F * nh + j];
            }
        }
        CellKind::Gru => {
            for j in 0..nh {
                d_prev[j] += dh[j] * (1.0 - rec.acts[GRU_Z * nh + j]);
            }
        }
    }
}
