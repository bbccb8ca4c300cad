use std::collections::HashSet;

use rand::seq::index::sample;
use rand::Rng as _;

use super::{uniform_incl, Difficulty, EnvError, IsiPreset, Observation};
use crate::rng::{seeded_rng, stream, Rng};

/// Noisy patterning (fixed ISI of 4) and trace patterning (uniform ISI).
///
/// Every trial presents an `n_cs/2`-hot CS pattern; with probability one half
/// it is drawn from the activation set, otherwise from the remaining
/// `n_cs/2`-hot patterns. The US fires iff (pattern activates) XOR (noise
/// flip). Distractors are fair coins held for the CS presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct PatterningConfig {
    pub n_cs: usize,
    pub n_patterns: usize,
    pub n_distractors: usize,
    pub noise: f64,
    pub isi_low: u32,
    pub isi_high: u32,
    pub iti_low: u32,
    pub iti_high: u32,
    pub cs_duration: u32,
    pub us_duration: u32,
}

impl PatterningConfig {
    pub fn noisy(d: Difficulty) -> Self {
        let (n_cs, n_patterns, n_distractors, noise) = d.params();
        Self {
            n_cs,
            n_patterns,
            n_distractors,
            noise,
            isi_low: 4,
            isi_high: 4,
            iti_low: 80,
            iti_high: 120,
            cs_duration: 4,
            us_duration: 2,
        }
    }

    pub fn trace(isi: IsiPreset) -> Self {
        let (isi_low, isi_high) = isi.bounds();
        Self {
            isi_low,
            isi_high,
            ..Self::noisy(Difficulty::Medium)
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: String| Err(EnvError::InvalidConfig(m));
        if self.n_cs == 0 || !self.n_cs.is_multiple_of(2) {
            return bad(format!("n_cs must be even and positive, got {}", self.n_cs));
        }
        if self.n_patterns == 0 {
            return bad("n_patterns must be >= 1".into());
        }
        let total = half_hot_count(self.n_cs);
        if (self.n_patterns as u128) + 1 > total {
            return bad(format!(
                "n_patterns={} leaves no non-activating pattern: only C({}, {}) = {} patterns exist",
                self.n_patterns,
                self.n_cs,
                self.n_cs / 2,
                total
            ));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return bad(format!("noise must lie in [0, 1], got {}", self.noise));
        }
        if self.isi_low < 1 || self.isi_high < self.isi_low {
            return bad("need 1 <= isi_low <= isi_high".into());
        }
        if self.iti_high < self.iti_low || self.iti_low <= self.isi_high {
            return bad("need isi_high < iti_low <= iti_high".into());
        }
        if self.cs_duration < 1 || self.us_duration < 1 {
            return bad("stimulus durations must be >= 1".into());
        }
        Ok(())
    }
}

/// `C(n, n/2)`, saturating at `u128::MAX`.
fn half_hot_count(n: usize) -> u128 {
    let k = (n / 2) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul(n as u128 - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn random_half_hot(n: usize, rng: &mut Rng) -> Vec<u8> {
    let mut v = vec![0u8; n];
    for i in sample(rng, n, n / 2) {
        v[i] = 1;
    }
    v
}

/// Samples `k` distinct `n/2`-hot patterns uniformly without replacement.
pub fn sample_activation_patterns(
    n: usize,
    k: usize,
    rng: &mut Rng,
) -> Result<Vec<Vec<u8>>, EnvError> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(EnvError::InvalidConfig(format!(
            "pattern width must be even and positive, got {n}"
        )));
    }
    if k == 0 || (k as u128) + 1 > half_hot_count(n) {
        return Err(EnvError::InvalidConfig(format!(
            "cannot draw {k} activation patterns of width {n} and keep a non-activating one"
        )));
    }
    let mut seen = HashSet::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let p = random_half_hot(n, rng);
        if seen.insert(p.clone()) {
            out.push(p);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub(super) struct Patterning {
    cfg: PatterningConfig,
    rng: Rng,
    patterns: Vec<Vec<u8>>,
    pattern_set: HashSet<Vec<u8>>,
    next_cs_onset: u64,
    us_onset: Option<u64>,
    cs_left: u32,
    us_left: u32,
    trial_cs: Vec<u8>,
    trial_distractors: Vec<u8>,
    pub(super) last_activating: bool,
    pub(super) last_flipped: bool,
}

impl Patterning {
    pub(super) fn new(cfg: PatterningConfig, seed: u64) -> Result<Self, EnvError> {
        let mut rng = seeded_rng(seed, stream::ENV);
        let patterns = sample_activation_patterns(cfg.n_cs, cfg.n_patterns, &mut rng)?;
        let pattern_set = patterns.iter().cloned().collect();
        let first = u64::from(uniform_incl(&mut rng, cfg.iti_low, cfg.iti_high));
        Ok(Self {
            trial_cs: vec![0; cfg.n_cs],
            trial_distractors: vec![0; cfg.n_distractors],
            cfg,
            rng,
            patterns,
            pattern_set,
            next_cs_onset: first,
            us_onset: None,
            cs_left: 0,
            us_left: 0,
            last_activating: false,
            last_flipped: false,
        })
    }

    pub(super) fn activation_patterns(&self) -> &[Vec<u8>] {
        &self.patterns
    }

    fn begin_trial(&mut self, t: u64) {
        let activating = self.rng.random_bool(0.5);
        self.trial_cs = if activating {
            let i = self.rng.random_range(0..self.patterns.len());
            self.patterns[i].clone()
        } else {
            loop {
                let p = random_half_hot(self.cfg.n_cs, &mut self.rng);
                if !self.pattern_set.contains(&p) {
                    break p;
                }
            }
        };
        for d in self.trial_distractors.iter_mut() {
            *d = u8::from(self.rng.random_bool(0.5));
        }
        let flipped = self.rng.random_bool(self.cfg.noise);
        let isi = uniform_incl(&mut self.rng, self.cfg.isi_low, self.cfg.isi_high);
        let iti = uniform_incl(&mut self.rng, self.cfg.iti_low, self.cfg.iti_high);
        let us_at = t + u64::from(isi);
        self.us_onset = (activating != flipped).then_some(us_at);
        self.cs_left = self.cfg.cs_duration;
        self.next_cs_onset = us_at + u64::from(iti);
        self.last_activating = activating;
        self.last_flipped = flipped;
    }

    pub(super) fn step(&mut self, t: u64, obs: &mut Observation) -> bool {
        let onset = t == self.next_cs_onset;
        if onset {
            self.begin_trial(t);
        }
        if self.us_onset == Some(t) {
            self.us_left = self.cfg.us_duration;
            self.us_onset = None;
        }
        let cs_on = self.cs_left > 0;
        for (dst, &src) in obs.cs.iter_mut().zip(&self.trial_cs) {
            *dst = if cs_on { src } else { 0 };
        }
        for (dst, &src) in obs.distractors.iter_mut().zip(&self.trial_distractors) {
            *dst = if cs_on { src } else { 0 };
        }
        obs.us = u8::from(self.us_left > 0);
        self.cs_left = self.cs_left.saturating_sub(1);
        self.us_left = self.us_left.saturating_sub(1);
        onset
    }
}
