use super::gate::*;
use super::{axpy, forward_step, CellKind, CellParams, CellShape, StepRecord};

/// Real-time recurrent learning state: the influence matrix
/// `J = d(state)/d(cell params)` (row-major, `state_len x n_cell_params`),
/// double-buffered so the Jacobian of the previous step stays available for
/// one step after propagation.
#[derive(Debug, Clone)]
pub struct Rtrl {
    shape: CellShape,
    jac: Vec<f64>,
    prev: Vec<f64>,
    rec: StepRecord,
    s1: Vec<f64>,
    s2: Vec<f64>,
    s3: Vec<f64>,
    mix: Vec<f64>,
}

impl Rtrl {
    pub fn new(shape: CellShape) -> Self {
        let p = shape.n_cell_params();
        let h = shape.hidden;
        let big = shape.state_len() * p;
        Self {
            shape,
            jac: vec![0.0; big],
            prev: vec![0.0; big],
            rec: StepRecord::new(&shape),
            s1: vec![0.0; h * p],
            s2: vec![0.0; h * p],
            s3: vec![0.0; h * p],
            mix: vec![0.0; h * h],
        }
    }

    pub fn reset(&mut self) {
        self.jac.fill(0.0);
        self.prev.fill(0.0);
    }

    /// Jacobian after the most recent [`Rtrl::step`].
    pub fn jacobian(&self) -> &[f64] {
        &self.jac
    }

    /// Jacobian before the most recent [`Rtrl::step`].
    pub fn previous_jacobian(&self) -> &[f64] {
        &self.prev
    }

    pub fn record(&self) -> &StepRecord {
        &self.rec
    }

    /// Advances the cell and propagates `J' = D_state J + D_params`.
    pub fn step(&mut self, params: &CellParams, prev_state: &[f64], x: &[f64], next: &mut [f64]) {
        debug_assert_eq!(params.shape, self.shape);
        forward_step(params, prev_state, x, next, &mut self.rec);
        std::mem::swap(&mut self.jac, &mut self.prev);
        match self.shape.kind {
            CellKind::Vanilla => self.propagate_vanilla(params),
            CellKind::Lstm => self.propagate_lstm(params, prev_state, next),
            CellKind::Gru => self.propagate_gru(params, prev_state),
        }
    }

    fn propagate_vanilla(&mut self, params: &CellParams) {
        let s = self.shape;
        let p = s.n_cell_params();
        let len = s.row_len();
        recurrent_product(params, 0, &self.prev[..s.hidden * p], &mut self.jac, p);
        for j in 0..s.hidden {
            let row = &mut self.jac[j * p..(j + 1) * p];
            let at = s.row(0, j);
            axpy(1.0, &self.rec.a, &mut row[at..at + len]);
            let h = self.rec.acts[j];
            let scale = 1.0 - h * h;
            row.iter_mut().for_each(|v| *v *= scale);
        }
    }

    fn propagate_lstm(&mut self, params: &CellParams, prev_state: &[f64], next: &[f64]) {
        let s = self.shape;
        let nh = s.hidden;
        let ni = s.input;
        let p = s.n_cell_params();
        let len = s.row_len();
        let acts = &self.rec.acts;
        let (jh_old, jc_old) = self.prev.split_at(nh * p);
        let c_prev = &prev_state[nh..];

        // dc/dh_prev = diag(g σ'_i) W_ih + diag(c_prev σ'_f) W_fh + diag(i tanh'_g) W_gh.
        for j in 0..nh {
            let i = acts[LSTM_I * nh + j];
            let f = acts[LSTM_F * nh + j];
            let g = acts[LSTM_G * nh + j];
            let ci = g * i * (1.0 - i);
            let cf = c_prev[j] * f * (1.0 - f);
            let cg = i * (1.0 - g * g);
            let wi = &params.gate_row(LSTM_I, j)[ni..ni + nh];
            let wf = &params.gate_row(LSTM_F, j)[ni..ni + nh];
            let wg = &params.gate_row(LSTM_G, j)[ni..ni + nh];
            for l in 0..nh {
                self.mix[j * nh + l] = ci * wi[l] + cf * wf[l] + cg * wg[l];
            }
        }
        let (jh_new, jc_new) = self.jac.split_at_mut(nh * p);
        dense_product(&self.mix, nh, jh_old, jc_new, p);
        for j in 0..nh {
            let i = acts[LSTM_I * nh + j];
            let f = acts[LSTM_F * nh + j];
            let g = acts[LSTM_G * nh + j];
            let row = &mut jc_new[j * p..(j + 1) * p];
            axpy(f, &jc_old[j * p..(j + 1) * p], row);
            for (gate, coef) in [
                (LSTM_I, g * i * (1.0 - i)),
                (LSTM_F, c_prev[j] * f * (1.0 - f)),
                (LSTM_G, i * (1.0 - g * g)),
            ] {
                let at = s.row(gate, j);
                axpy(coef, &self.rec.a, &mut row[at..at + len]);
            }
        }

        // Output gate pre-activation sensitivity, then h = o tanh(c).
        recurrent_product(params, LSTM_O, jh_old, &mut self.s1, p);
        for j in 0..nh {
            let o = acts[LSTM_O * nh + j];
            let tc = self.rec.aux[j];
            debug_assert!((next[j] - o * tc).abs() < 1e-12);
            let at = s.row(LSTM_O, j);
            let po = &mut self.s1[j * p..(j + 1) * p];
            axpy(1.0, &self.rec.a, &mut po[at..at + len]);
            let row = &mut jh_new[j * p..(j + 1) * p];
            let a = tc * o * (1.0 - o);
            let b = o * (1.0 - tc * tc);
            let crow = &jc_new[j * p..(j + 1) * p];
            for ((dst, &po), &jc) in row.iter_mut().zip(po.iter()).zip(crow) {
                *dst = a * po + b * jc;
            }
        }
    }

    fn propagate_gru(&mut self, params: &CellParams, prev_state: &[f64]) {
        let s = self.shape;
        let nh = s.hidden;
        let p = s.n_cell_params();
        let len = s.row_len();
        let h_prev = &prev_state[..nh];
        let acts = &self.rec.acts;
        let j_old = &self.prev[..];

        // Update and reset gate pre-activation sensitivities.
        recurrent_product(params, GRU_Z, j_old, &mut self.s1, p);
        recurrent_product(params, GRU_R, j_old, &mut self.s2, p);
        for j in 0..nh {
            for (buf, gate) in [(&mut self.s1, GRU_Z), (&mut self.s2, GRU_R)] {
                let at = s.row(gate, j);
                axpy(1.0, &self.rec.a, &mut buf[j * p + at..j * p + at + len]);
            }
        }
        // s2 becomes d(r ⊙ h_prev) = diag(h_prev σ'_r) dpre_r + diag(r) J.
        for l in 0..nh {
            let r = acts[GRU_R * nh + l];
            let row = &mut self.s2[l * p..(l + 1) * p];
            let scale = h_prev[l] * r * (1.0 - r);
            for (dst, &jv) in row.iter_mut().zip(&j_old[l * p..(l + 1) * p]) {
                *dst = scale * *dst + r * jv;
            }
        }
        // Candidate pre-activation sensitivity.
        recurrent_product(params, GRU_N, &self.s2, &mut self.s3, p);
        for j in 0..nh {
            let at = s.row(GRU_N, j);
            axpy(1.0, &self.rec.aux, &mut self.s3[j * p + at..j * p + at + len]);
        }
        for j in 0..nh {
            let z = acts[GRU_Z * nh + j];
            let n = acts[GRU_N * nh + j];
            let cz = (n - h_prev[j]) * z * (1.0 - z);
            let cn = z * (1.0 - n * n);
            let keep = 1.0 - z;
            let row = &mut self.jac[j * p..(j + 1) * p];
            let old = &j_old[j * p..(j + 1) * p];
            let pz = &self.s1[j * p..(j + 1) * p];
            let pn = &self.s3[j * p..(j + 1) * p];
            for k in 0..p {
                row[k] = keep * old[k] + cz * pz[k] + cn * pn[k];
            }
        }
    }
}

/// `out[j, :] = sum_l W_gate,h[j, l] * src[l, :]` for the gate's recurrent
/// weights; `src` and `out` are `hidden x width` row-major.
fn recurrent_product(params: &CellParams, gate: usize, src: &[f64], out: &mut [f64], width: usize) {
    let s = params.shape;
    let (ni, nh) = (s.input, s.hidden);
    for j in 0..nh {
        let w = &params.gate_row(gate, j)[ni..ni + nh];
        let dst = &mut out[j * width..(j + 1) * width];
        dst.fill(0.0);
        for (l, &wl) in w.iter().enumerate() {
            if wl != 0.0 {
                axpy(wl, &src[l * width..(l + 1) * width], dst);
            }
        }
    }
}

/// `out = m * src` with `m` an `n x n` row-major matrix.
fn dense_product(m: &[f64], n: usize, src: &[f64], out: &mut [f64], width: usize) {
    for j in 0..n {
        let dst = &mut out[j * width..(j + 1) * width];
        dst.fill(0.0);
        for l in 0..n {
            let c = m[j * n + l];
            if c != 0.0 {
                axpy(c, &src[l * width..(l + 1) * width], dst);
            }
        }
    }
}

/// One RTRL step from an explicit Jacobian: returns the next state and
/// `J' = D_state J + D_params`.
pub fn rtrl_propagate(
    params: &CellParams,
    jac: &[f64],
    prev_state: &[f64],
    x: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let mut r = Rtrl::new(params.shape);
    r.jac.copy_from_slice(jac);
    let mut next = vec![0.0; params.shape.state_len()];
    r.step(params, prev_state, x, &mut next);
    (next, r.jac)
}

/// Gradient of `V = w_out · h + b_out` over all parameters, given the
/// influence matrix `jac` for state `h`: the cell block is `w_outᵀ J_h` and
/// the head block is `(h, 1)`.
pub fn rtrl_value_gradient(params: &CellParams, jac: &[f64], h: &[f64], grad: &mut [f64]) {
    let s = params.shape;
    let p = s.n_cell_params();
    let (cell, head) = grad.split_at_mut(p);
    cell.fill(0.0);
    for (j, &w) in params.w_out().iter().enumerate() {
        if w != 0.0 {
            axpy(w, &jac[j * p..(j + 1) * p], cell);
        }
    }
    head[..s.hidden].copy_from_slice(&h[..s.hidden]);
    head[s.hidden] = 1.0;
}

#[cfg(test)]
mod tests {
    use super::super::{backward_step, init_params, value_head};
    use super::*;
    use crate::rng::seeded_rng;
    use rand::Rng;

    fn randomized(kind: CellKind, input: usize, hidden: usize, seed: u64) -> CellParams {
        let mut p = init_params(kind, input, hidden, seed);
        let mut rng = seeded_rng(seed, 77);
        for w in p.theta.iter_mut() {
            *w += rng.random_range(-0.4..0.4);
        }
        p
    }

    /// Gradient of V_t w.r.t. all parameters by backpropagating from the
    /// final step to the start of the sequence.
    fn full_bptt(p: &CellParams, xs: &[Vec<f64>]) -> Vec<f64> {
        let s = p.shape;
        let mut states = vec![vec![0.0; s.state_len()]];
        let mut recs = Vec::new();
        for x in xs {
            let mut rec = StepRecord::new(&s);
            let mut next = vec![0.0; s.state_len()];
            forward_step(p, states.last().unwrap(), x, &mut next, &mut rec);
            states.push(next);
            recs.push(rec);
        }
        let mut grad = vec![0.0; s.n_params()];
        let n = s.n_cell_params();
        let h = &states.last().unwrap()[..s.hidden];
        grad[n..n + s.hidden].copy_from_slice(h);
        grad[n + s.hidden] = 1.0;
        let mut d = vec![0.0; s.state_len()];
        d[..s.hidden].copy_from_slice(p.w_out());
        let mut d_prev = vec![0.0; s.state_len()];
        let mut scratch = Vec::new();
        for k in (0..xs.len()).rev() {
            backward_step(p, &states[k], &recs[k], &d, &mut grad[..n], Some(&mut d_prev), &mut scratch);
            std::mem::swap(&mut d, &mut d_prev);
        }
        grad
    }

    #[test]
    fn frozen_rtrl_equals_full_bptt() {
        let mut rng = seeded_rng(5, 5);
        for case in 0..12u64 {
            let kind = [CellKind::Vanilla, CellKind::Lstm, CellKind::Gru][case as usize % 3];
            let hidden = 1 + (case as usize * 3) % 8;
            let len = 1 + (case as usize * 17) % 50;
            let mut p = randomized(kind, 3, hidden, case);
            let (w, b) = p.head_mut();
            w.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
            *b = 0.3;
            let xs: Vec<Vec<f64>> = (0..len)
                .map(|_| (0..3).map(|_| f64::from(rng.random_bool(0.5) as u8)).collect())
                .collect();
            let mut r = Rtrl::new(p.shape);
            let mut state = vec![0.0; p.shape.state_len()];
            let mut next = state.clone();
            for x in &xs {
                r.step(&p, &state, x, &mut next);
                std::mem::swap(&mut state, &mut next);
            }
            let mut g = vec![0.0; p.shape.n_params()];
            rtrl_value_gradient(&p, r.jacobian(), &state, &mut g);
            let oracle = full_bptt(&p, &xs);
            for (i, (a, b)) in g.iter().zip(&oracle).enumerate() {
                let err = (a - b).abs() / a.abs().max(b.abs()).max(1e-8);
                assert!(err < 1e-6, "{kind:?} case {case} param {i}: {a} vs {b}");
            }
            let v = value_head(&p, &state[..hidden]);
            assert!(v.is_finite());
        }
    }

    #[test]
    fn first_step_from_rest_is_parameter_jacobian() {
        // From h = 0 with zero J, J' = D_params; check it against one-step BPTT
        // per state coordinate.
        for kind in [CellKind::Vanilla, CellKind::Lstm, CellKind::Gru] {
            let p = randomized(kind, 2, 3, 11);
            let s = p.shape;
            let zero = vec![0.0; s.state_len() * s.n_cell_params()];
            let (_, j1) = rtrl_propagate(&p, &zero, &vec![0.0; s.state_len()], &[1.0, 0.0]);
            let mut rec = StepRecord::new(&s);
            let mut next = vec![0.0; s.state_len()];
            let prev = vec![0.0; s.state_len()];
            forward_step(&p, &prev, &[1.0, 0.0], &mut next, &mut rec);
            for row in 0..s.state_len() {
                let mut d = vec![0.0; s.state_len()];
                d[row] = 1.0;
                let mut g = vec![0.0; s.n_cell_params()];
                backward_step(&p, &prev, &rec, &d, &mut g, None, &mut Vec::new());
                let jr = &j1[row * s.n_cell_params()..(row + 1) * s.n_cell_params()];
                for (a, b) in jr.iter().zip(&g) {
                    assert!((a - b).abs() < 1e-14, "{kind:?} row {row}");
                }
            }
        }
    }

    #[test]
    fn vanilla_without_recurrence_has_no_temporal_carry() {
        let mut p = randomized(CellKind::Vanilla, 2, 4, 3);
        for j in 0..4 {
            p.gate_row_mut(0, j)[2..6].fill(0.0);
        }
        let s = p.shape;
        let mut r = Rtrl::new(s);
        let mut state = vec![0.0; 4];
        let mut next = state.clone();
        for t in 0..6 {
            let x = [1.0, (t % 2) as f64];
            r.step(&p, &state, &x, &mut next);
            let (_, fresh) = rtrl_propagate(&p, &vec![0.0; 4 * s.n_cell_params()], &state, &x);
            assert_eq!(r.jacobian(), &fresh[..]);
            std::mem::swap(&mut state, &mut next);
        }
    }

    #[test]
    fn value_gradient_blocks() {
        let mut p = randomized(CellKind::Gru, 2, 3, 4);
        let (w, b) = p.head_mut();
        w.fill(0.0);
        *b = 0.0;
        let s = p.shape;
        let n = s.n_cell_params();
        let jac: Vec<f64> = (0..3 * n).map(|i| (i as f64).sin()).collect();
        let h = [0.1, -0.2, 0.3];
        let mut g = vec![0.0; s.n_params()];
        rtrl_value_gradient(&p, &jac, &h, &mut g);
        assert!(g[..n].iter().all(|&v| v == 0.0));
        assert_eq!(&g[n..], &[0.1, -0.2, 0.3, 1.0]);
        let mut q = p.clone();
        q.head_mut().0.copy_from_slice(&[1.0, 2.0, 3.0]);
        rtrl_value_gradient(&q, &vec![0.0; 3 * n], &h, &mut g);
        assert!(g[..n].iter().all(|&v| v == 0.0));
        assert_eq!(&g[n..], &[0.1, -0.2, 0.3, 1.0]);
    }
}
