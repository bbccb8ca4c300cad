use super::{backward_step, forward_step, value_head, CellParams, CellShape, StepRecord};

/// The last `T + 1` inputs with their US values, and for each the (stale)
/// state that preceded it. The oldest entry's preceding state is the
/// truncation snapshot.
#[derive(Debug, Clone)]
pub struct WindowBuffer {
    cap: usize,
    len: usize,
    head: usize,
    input_len: usize,
    state_len: usize,
    inputs: Vec<f64>,
    us: Vec<f64>,
    prev_states: Vec<f64>,
}

impl WindowBuffer {
    /// A window for truncation length `truncation` (capacity `truncation + 1`).
    pub fn new(truncation: usize, input_len: usize, state_len: usize) -> Self {
        assert!(truncation >= 1, "truncation length must be >= 1");
        let cap = truncation + 1;
        Self {
            cap,
            len: 0,
            head: 0,
            input_len,
            state_len,
            inputs: vec![0.0; cap * input_len],
            us: vec![0.0; cap],
            prev_states: vec![0.0; cap * state_len],
        }
    }

    pub fn truncation(&self) -> usize {
        self.cap - 1
    }

    pub fn capacity(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.cap
    }

    /// Appends `(state_{t-1}, x_t, US_t)`, evicting the oldest entry when full.
    pub fn push(&mut self, prev_state: &[f64], input: &[f64], us: f64) {
        let slot = (self.head + self.len) % self.cap;
        self.inputs[slot * self.input_len..(slot + 1) * self.input_len].copy_from_slice(input);
        self.prev_states[slot * self.state_len..(slot + 1) * self.state_len]
            .copy_from_slice(prev_state);
        self.us[slot] = us;
        if self.len < self.cap {
            self.len += 1;
        } else {
            self.head = (self.head + 1) % self.cap;
        }
    }

    fn slot(&self, k: usize) -> usize {
        (self.head + k) % self.cap
    }

    /// Input `k` steps after the oldest.
    pub fn input(&self, k: usize) -> &[f64] {
        let s = self.slot(k);
        &self.inputs[s * self.input_len..(s + 1) * self.input_len]
    }

    pub fn us(&self, k: usize) -> f64 {
        self.us[self.slot(k)]
    }

    /// The state preceding the oldest buffered input.
    pub fn snapshot(&self) -> &[f64] {
        let s = self.slot(0);
        &self.prev_states[s * self.state_len..(s + 1) * self.state_len]
    }
}

/// Reusable buffers for [`tbptt_gradient`].
#[derive(Debug, Clone)]
pub struct Tbptt {
    states: Vec<Vec<f64>>,
    records: Vec<StepRecord>,
    values: Vec<f64>,
    d_state: Vec<f64>,
    d_prev: Vec<f64>,
    dpre: Vec<f64>,
}

impl Tbptt {
    pub fn new(shape: &CellShape, truncation: usize) -> Self {
        let n = truncation + 1;
        Self {
            states: vec![vec![0.0; shape.state_len()]; n + 1],
            records: (0..n).map(|_| StepRecord::new(shape)).collect(),
            values: vec![0.0; n],
            d_state: vec![0.0; shape.state_len()],
            d_prev: vec![0.0; shape.state_len()],
            dpre: Vec::new(),
        }
    }

    /// Writes the truncated semi-gradient TD(0) gradient of the window into
    /// `grad` (length `n_params`). See [`tbptt_gradient`].
    pub fn gradient(
        &mut self,
        params: &CellParams,
        window: &WindowBuffer,
        gamma: f64,
        grad: &mut [f64],
    ) {
        let shape = params.shape;
        let nh = shape.hidden;
        let n_cell = shape.n_cell_params();
        grad.fill(0.0);
        if !window.is_full() {
            return;
        }
        let t = window.truncation();

        // Recompute the window under the current parameters.
        self.states[0].copy_from_slice(window.snapshot());
        for k in 0..=t {
            let (done, rest) = self.states.split_at_mut(k + 1);
            forward_step(params, &done[k], window.input(k), &mut rest[0], &mut self.records[k]);
            self.values[k] = value_head(params, &rest[0][..nh]);
        }

        // dL/dV_k = -delta_k / T for the T transitions; V_t is target only.
        let inv_t = 1.0 / t as f64;
        self.d_state.fill(0.0);
        let (grad_cell, grad_head) = grad.split_at_mut(n_cell);
        for k in (0..t).rev() {
            let delta = window.us(k + 1) + gamma * self.values[k + 1] - self.values[k];
            let dv = -delta * inv_t;
            let h = &self.states[k + 1][..nh];
            for (j, hj) in h.iter().enumerate() {
                grad_head[j] += dv * hj;
                self.d_state[j] += dv * params.w_out()[j];
            }
            grad_head[nh] += dv;
            let d_prev = (k > 0).then_some(&mut self.d_prev[..]);
            backward_step(
                params,
                &self.states[k],
                &self.records[k],
                &self.d_state,
                grad_cell,
                d_prev,
                &mut self.dpre,
            );
            if k > 0 {
                std::mem::swap(&mut self.d_state, &mut self.d_prev);
            }
        }
    }
}

/// Truncated-BPTT gradient of the window's mean semi-gradient TD(0) loss.
///
/// Replays the window from its snapshot under the current parameters, forms
/// `delta_i = US_{i+1} + gamma V_{i+1} - V_i` for each of the `T` transitions
/// with the target held constant, and returns `-(1/T) sum_i delta_i grad V_i`.
/// No gradient flows into the snapshot. Returns zeros until the window fills.
pub fn tbptt_gradient(params: &CellParams, window: &WindowBuffer, gamma: f64) -> Vec<f64> {
    let mut grad = vec![0.0; params.shape.n_params()];
    Tbptt::new(&params.shape, window.truncation()).gradient(params, window, gamma, &mut grad);
    grad
}

#[cfg(test)]
mod tests {
    use super::super::{cell_forward, init_params, CellKind};
    use super::*;
    use crate::rng::seeded_rng;
    use rand::Rng;

    fn randomized(kind: CellKind, input: usize, hidden: usize, seed: u64) -> CellParams {
        let mut p = init_params(kind, input, hidden, seed);
        let mut rng = seeded_rng(seed, 99);
        for w in p.theta.iter_mut() {
            *w += rng.random_range(-0.5..0.5);
        }
        p
    }

    fn random_window(
        p: &CellParams,
        t: usize,
        seed: u64,
    ) -> WindowBuffer {
        let mut rng = seeded_rng(seed, 98);
        let s = p.shape;
        let mut w = WindowBuffer::new(t, s.input, s.state_len());
        let mut state: Vec<f64> = (0..s.state_len()).map(|_| rng.random_range(-0.5..0.5)).collect();
        // Push a few extra entries to exercise ring wrap-around.
        for _ in 0..t + 4 {
            let x: Vec<f64> = (0..s.input).map(|_| f64::from(rng.random_bool(0.4) as u8)).collect();
            let us = f64::from(rng.random_bool(0.3) as u8);
            w.push(&state, &x, us);
            state = cell_forward(p, &state, &x);
        }
        w
    }

    /// Frozen-target objective `1/(2T) sum (y_k - V_k)^2`, forward only.
    fn frozen_loss(p: &CellParams, w: &WindowBuffer, targets: &[f64]) -> f64 {
        let nh = p.shape.hidden;
        let mut state = w.snapshot().to_vec();
        let t = w.truncation();
        let mut loss = 0.0;
        for k in 0..t {
            state = cell_forward(p, &state, w.input(k));
            let v = value_head(p, &state[..nh]);
            loss += (targets[k] - v).powi(2);
        }
        loss / (2.0 * t as f64)
    }

    fn values(p: &CellParams, w: &WindowBuffer) -> Vec<f64> {
        let nh = p.shape.hidden;
        let mut state = w.snapshot().to_vec();
        (0..=w.truncation())
            .map(|k| {
                state = cell_forward(p, &state, w.input(k));
                value_head(p, &state[..nh])
            })
            .collect()
    }

    #[test]
    fn matches_central_differences() {
        let gamma = 0.9;
        let mut worst = 0.0f64;
        for (case, kind) in [CellKind::Vanilla, CellKind::Lstm, CellKind::Gru]
            .into_iter()
            .cycle()
            .take(21)
            .enumerate()
        {
            let seed = case as u64;
            let hidden = 2 + case % 5;
            let t = 1 + case % 8;
            let p = randomized(kind, 3, hidden, seed);
            let w = random_window(&p, t, seed);
            let v = values(&p, &w);
            let targets: Vec<f64> = (0..t).map(|k| w.us(k + 1) + gamma * v[k + 1]).collect();
            let g = tbptt_gradient(&p, &w, gamma);
            let eps = 1e-5;
            for i in 0..p.theta.len() {
                let mut plus = p.clone();
                plus.theta[i] += eps;
                let mut minus = p.clone();
                minus.theta[i] -= eps;
                let fd = (frozen_loss(&plus, &w, &targets) - frozen_loss(&minus, &w, &targets))
                    / (2.0 * eps);
                let err = (fd - g[i]).abs() / fd.abs().max(g[i].abs()).max(1e-6);
                worst = worst.max(err);
                assert!(err < 1e-4, "{kind:?} case {case} param {i}: fd {fd} vs {}", g[i]);
            }
        }
        assert!(worst < 1e-4);
    }

    #[test]
    fn warm_up_gives_zero_gradient() {
        let p = randomized(CellKind::Lstm, 2, 3, 1);
        let mut w = WindowBuffer::new(4, 2, 6);
        w.push(&[0.0; 6], &[1.0, 0.0], 0.0);
        assert!(tbptt_gradient(&p, &w, 0.9).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn zero_td_errors_give_zero_gradient() {
        // With zero parameters every V is 0 and all US are 0, so every delta is 0.
        let p = CellParams::zeros(CellShape::new(CellKind::Gru, 2, 3));
        let mut w = WindowBuffer::new(3, 2, 3);
        for _ in 0..4 {
            w.push(&[0.0; 3], &[1.0, 0.0], 0.0);
        }
        assert!(tbptt_gradient(&p, &w, 0.9).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn single_step_window_is_single_transition_semi_gradient() {
        let p = randomized(CellKind::Vanilla, 2, 3, 5);
        let w = random_window(&p, 1, 5);
        let v = values(&p, &w);
        let delta = w.us(1) + 0.8 * v[1] - v[0];
        // grad V_{t-1} w.r.t. the head is (h, 1).
        let h = cell_forward(&p, w.snapshot(), w.input(0));
        let g = tbptt_gradient(&p, &w, 0.8);
        let n = p.shape.n_cell_params();
        for j in 0..3 {
            assert!((g[n + j] + delta * h[j]).abs() < 1e-14);
        }
        assert!((g[n + 3] + delta).abs() < 1e-14);
    }
}
