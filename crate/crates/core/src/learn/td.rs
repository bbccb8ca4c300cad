use super::AdamState;
use crate::repr::FeatureVector;

/// `us_next + gamma * v_next - v_cur`.
#[inline]
pub fn td_error(us_next: f64, v_next: f64, v_cur: f64, gamma: f64) -> f64 {
    us_next + gamma * v_next - v_cur
}

/// Linear value weights with an accumulating eligibility trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TdLambdaState {
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub lambda: f64,
    pub gamma: f64,
}

impl TdLambdaState {
    pub fn new(dim: usize, lambda: f64, gamma: f64) -> Self {
        Self {
            w: vec![0.0; dim],
            z: vec![0.0; dim],
            lambda,
            gamma,
        }
    }

    pub fn value(&self, x: &FeatureVector) -> f64 {
        x.dot(&self.w)
    }

    /// `z := gamma lambda z + x`, then one ADAM step on the pseudo-gradient
    /// `-delta z`.
    pub fn step(&mut self, adam: &mut AdamState, x: &FeatureVector, delta: f64, grad: &mut Vec<f64>) {
        let decay = self.gamma * self.lambda;
        if decay == 0.0 {
            self.z.fill(0.0);
        } else {
            self.z.iter_mut().for_each(|z| *z *= decay);
        }
        x.add_scaled_to(1.0, &mut self.z);
        grad.clear();
        grad.extend(self.z.iter().map(|z| -delta * z));
        adam.apply(&mut self.w, grad);
    }
}

/// Functional form of [`TdLambdaState::step`].
pub fn linear_td_lambda_step(
    state: &mut TdLambdaState,
    adam: &mut AdamState,
    x_cur: &FeatureVector,
    delta: f64,
) {
    let mut g = Vec::with_capacity(state.w.len());
    state.step(adam, x_cur, delta, &mut g);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn td_error_examples() {
        assert!((td_error(0.0, 0.6, 0.5, 0.9) - 0.04).abs() < 1e-15);
        assert_eq!(td_error(1.0, 0.0, 0.0, 0.42), 1.0);
        let (us, vn, g) = (0.5, 0.8, 0.9);
        assert_eq!(td_error(us, vn, us + g * vn, g), 0.0);
    }

    fn e1(dim: usize) -> FeatureVector {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        FeatureVector::Dense(v)
    }

    #[test]
    fn trace_recursion() {
        let mut s = TdLambdaState::new(2, 0.9, 0.9);
        let mut a = AdamState::new(2, 0.1);
        linear_td_lambda_step(&mut s, &mut a, &e1(2), 0.0);
        assert_eq!(s.z[0], 1.0);
        linear_td_lambda_step(&mut s, &mut a, &e1(2), 0.0);
        assert!((s.z[0] - 1.81).abs() < 1e-15);
        // Zero TD errors from fresh moments leave weights untouched.
        assert_eq!(s.w, vec![0.0, 0.0]);
    }

    #[test]
    fn lambda_zero_is_td0() {
        let mut s = TdLambdaState::new(3, 0.0, 0.9);
        let mut a = AdamState::new(3, 0.1);
        for k in 0..3 {
            let mut v = vec![0.0; 3];
            v[k] = 2.0;
            linear_td_lambda_step(&mut s, &mut a, &FeatureVector::Dense(v.clone()), 0.5);
            assert_eq!(s.z, v);
        }
    }

    #[test]
    fn trace_converges_to_geometric_limit() {
        let (gamma, lambda) = (0.9, 0.9);
        let mut s = TdLambdaState::new(1, lambda, gamma);
        let mut a = AdamState::new(1, 0.0);
        let x = FeatureVector::Dense(vec![1.0]);
        let limit = 1.0 / (1.0 - gamma * lambda);
        let mut gaps = Vec::new();
        for _ in 0..200 {
            linear_td_lambda_step(&mut s, &mut a, &x, 0.0);
            gaps.push(limit - s.z[0]);
        }
        for w in gaps.windows(2).take(60) {
            assert!((w[1] / w[0] - gamma * lambda).abs() < 1e-6);
        }
        assert!(gaps[199].abs() < 1e-12);
    }
}
