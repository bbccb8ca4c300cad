/// ADAM moments and hyperparameters for one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    steps: u64,
    beta1_pow: f64,
    beta2_pow: f64,
}

impl AdamState {
    /// Fresh moments with `beta1 = 0.9`, `beta2 = 0.999`, `eps = 1e-8`.
    pub fn new(n: usize, alpha: f64) -> Self {
        Self::with_betas(n, alpha, 0.9, 0.999, 1e-8)
    }

    pub fn with_betas(n: usize, alpha: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            alpha,
            beta1,
            beta2,
            eps,
            m: vec![0.0; n],
            v: vec![0.0; n],
            steps: 0,
            beta1_pow: 1.0,
            beta2_pow: 1.0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    /// One bias-corrected ADAM step on `params` along gradient `g`.
    pub fn apply(&mut self, params: &mut [f64], g: &[f64]) {
        debug_assert_eq!(params.len(), self.m.len());
        debug_assert_eq!(g.len(), self.m.len());
        self.steps += 1;
        self.beta1_pow *= self.beta1;
        self.beta2_pow *= self.beta2;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 / (1.0 - self.beta1_pow);
        let c2 = 1.0 / (1.0 - self.beta2_pow);
        for (((p, &gi), m), v) in params
            .iter_mut()
            .zip(g)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = b1 * *m + (1.0 - b1) * gi;
            *v = b2 * *v + (1.0 - b2) * gi * gi;
            *p -= self.alpha * (*m * c1) / ((*v * c2).sqrt() + self.eps);
        }
    }
}

/// Functional form of [`AdamState::apply`].
pub fn adam_apply(adam: &mut AdamState, params: &mut [f64], g: &[f64]) {
    adam.apply(params, g);
}
