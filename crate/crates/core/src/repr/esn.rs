use rand::Rng as _;

use super::FeatureVector;
use crate::envs::Observation;
use crate::rng::{seeded_rng, stream, Rng};

/// Power-iteration sweeps used when rescaling the reservoir. The spectrum of a
/// sparse random matrix crowds its boundary circle, so the growth-rate
/// estimate converges like `1/k`; this many sweeps keeps the relative error
/// well under 1e-3 for reservoirs up to a few thousand units.
pub const POWER_ITERATIONS: usize = 6000;

#[derive(Debug, Clone, PartialEq)]
pub struct EsnConfig {
    pub hidden: usize,
    pub spectral_radius: f64,
    pub input_scaling: f64,
    pub density: f64,
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `out = self * x`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            *o = self.cols[span.clone()]
                .iter()
                .zip(&self.vals[span])
                .map(|(&c, v)| v * x[c])
                .sum();
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for (r, row) in m.iter_mut().enumerate() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                row[self.cols[k]] = self.vals[k];
            }
        }
        m
    }

    fn scale(&mut self, s: f64) {
        self.vals.iter_mut().for_each(|v| *v *= s);
    }
}

/// Estimates the spectral radius by power iteration: the geometric-mean
/// growth factor over the second half of `iters` normalized sweeps.
pub fn spectral_radius_estimate(m: &SparseMatrix, iters: usize, rng: &mut Rng) -> f64 {
    let n = m.n;
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut y = vec![0.0; n];
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let n0 = norm(&x);
    x.iter_mut().for_each(|v| *v /= n0);
    let burn = iters / 2;
    let mut log_growth = 0.0;
    for k in 0..iters {
        m.mul_vec(&x, &mut y);
        let g = norm(&y);
        if g == 0.0 || !g.is_finite() {
            return 0.0;
        }
        if k >= burn {
            log_growth += g.ln();
        }
        for (a, b) in x.iter_mut().zip(&y) {
            *a = b / g;
        }
    }
    (log_growth / (iters - burn) as f64).exp()
}

/// Echo state network: fixed random input, recurrent and output-feedback
/// weights feeding a `tanh` reservoir; only the linear readout learns.
#[derive(Debug, Clone)]
pub struct Esn {
    cfg: EsnConfig,
    n_inputs: usize,
    /// `hidden x n_inputs`, row-major.
    w_in: Vec<f64>,
    w_h: SparseMatrix,
    w_fb: Vec<f64>,
    h: Vec<f64>,
    pre: Vec<f64>,
    input: Vec<f64>,
}

/// Builds an ESN for `n_inputs` observation channels.
///
/// Input and feedback weights are fair `±input_scaling` signs. Recurrent
/// weights are Bernoulli(`density`) nonzeros drawn from U(-1, 1), rescaled to
/// the configured spectral radius; samples with no usable spectrum (empty or
/// nilpotent) are redrawn.
pub fn esn_init(n_inputs: usize, cfg: &EsnConfig, seed: u64) -> Esn {
    assert!(cfg.hidden >= 1, "hidden size must be >= 1");
    assert!(
        cfg.spectral_radius > 0.0 && cfg.spectral_radius < 1.0,
        "spectral radius must lie in (0, 1)"
    );
    assert!(cfg.density > 0.0 && cfg.density <= 1.0, "density must lie in (0, 1]");
    let mut rng = seeded_rng(seed, stream::ESN);
    let n = cfg.hidden;
    let sign = |rng: &mut Rng| {
        if rng.random_bool(0.5) {
            cfg.input_scaling
        } else {
            -cfg.input_scaling
        }
    };
    let w_in = (0..n * n_inputs).map(|_| sign(&mut rng)).collect();
    let w_fb = (0..n).map(|_| sign(&mut rng)).collect();

    let w_h = loop {
        let mut m = SparseMatrix {
            n,
            row_ptr: Vec::with_capacity(n + 1),
            cols: Vec::new(),
            vals: Vec::new(),
        };
        m.row_ptr.push(0);
        for _ in 0..n {
            for c in 0..n {
                if rng.random_bool(cfg.density) {
                    m.cols.push(c);
                    m.vals.push(rng.random_range(-1.0..1.0));
                }
            }
            m.row_ptr.push(m.cols.len());
        }
        if m.nnz() == 0 {
            continue;
        }
        let rho = spectral_radius_estimate(&m, POWER_ITERATIONS, &mut rng);
        if rho < 1e-8 {
            continue;
        }
        m.scale(cfg.spectral_radius / rho);
        break m;
    };

    Esn {
        cfg: cfg.clone(),
        n_inputs,
        w_in,
        w_h,
        w_fb,
        h: vec![0.0; n],
        pre: vec![0.0; n],
        input: vec![0.0; n_inputs],
    }
}

impl Esn {
    pub fn config(&self) -> &EsnConfig {
        &self.cfg
    }

    pub fn hidden(&self) -> &[f64] {
        &self.h
    }

    pub fn set_hidden(&mut self, h: &[f64]) {
        self.h.copy_from_slice(h);
    }

    pub fn w_in(&self) -> &[f64] {
        &self.w_in
    }

    pub fn w_h(&self) -> &SparseMatrix {
        &self.w_h
    }

    pub fn w_fb(&self) -> &[f64] {
        &self.w_fb
    }

    /// Advances `h := tanh(W_in o + W_h h + w_fb v_prev)` and returns the new
    /// hidden state with a bias appended.
    pub fn step(&mut self, o: &Observation, v_prev: f64) -> FeatureVector {
        let mut out = FeatureVector::dense(self.cfg.hidden + 1);
        self.step_into(o, v_prev, &mut out);
        out
    }

    pub fn step_into(&mut self, o: &Observation, v_prev: f64, out: &mut FeatureVector) {
        o.write_channels(&mut self.input);
        self.w_h.mul_vec(&self.h, &mut self.pre);
        let ni = self.n_inputs;
        for (r, p) in self.pre.iter_mut().enumerate() {
            let row = &self.w_in[r * ni..(r + 1) * ni];
            let drive: f64 = row.iter().zip(&self.input).map(|(w, x)| w * x).sum();
            *p += drive + self.w_fb[r] * v_prev;
        }
        for (h, p) in self.h.iter_mut().zip(&self.pre) {
            *h = p.tanh();
        }
        let v = out.dense_values_mut();
        v[..self.cfg.hidden].copy_from_slice(&self.h);
        v[self.cfg.hidden] = 1.0;
    }
}
