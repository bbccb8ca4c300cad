//! Stimulus-stream generators.
//!
//! All three problems are uncontrolled: the observation stream depends only
//! on the configuration and the seed. Channel order everywhere in this crate
//! is `[cs..., us, distractors...]`.

mod patterning;
mod trace_conditioning;

pub use patterning::{sample_activation_patterns, PatterningConfig};
pub use trace_conditioning::TraceConditioningConfig;

use patterning::Patterning;
use trace_conditioning::TraceConditioning;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
}

/// One time step of stimuli. All entries are 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Observation {
    pub t: u64,
    pub us: u8,
    pub cs: Vec<u8>,
    pub distractors: Vec<u8>,
}

impl Observation {
    fn zeros(n_cs: usize, n_distractors: usize) -> Self {
        Self {
            t: 0,
            us: 0,
            cs: vec![0; n_cs],
            distractors: vec![0; n_distractors],
        }
    }

    pub fn n_channels(&self) -> usize {
        self.cs.len() + 1 + self.distractors.len()
    }

    /// Channels in canonical order: CSs, then the US, then distractors.
    pub fn channels(&self) -> impl Iterator<Item = u8> + '_ {
        self.cs
            .iter()
            .copied()
            .chain(std::iter::once(self.us))
            .chain(self.distractors.iter().copied())
    }

    /// Writes the channels as reals into `out`, which must have
    /// `n_channels()` entries.
    pub fn write_channels(&self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n_channels());
        for (dst, v) in out.iter_mut().zip(self.channels()) {
            *dst = f64::from(v);
        }
    }

    /// Index of the US within [`Observation::channels`].
    pub fn us_index(&self) -> usize {
        self.cs.len()
    }
}

/// Expected-ISI presets used for trace conditioning and trace patterning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsiPreset {
    Short,
    Medium,
    Long,
}

impl IsiPreset {
    pub fn bounds(self) -> (u32, u32) {
        match self {
            IsiPreset::Short => (7, 13),
            IsiPreset::Medium => (14, 26),
            IsiPreset::Long => (20, 40),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "short" => Some(Self::Short),
            "medium" => Some(Self::Medium),
            "long" => Some(Self::Long),
            _ => None,
        }
    }
}

/// Noisy-patterning difficulty presets as `(n_cs, n_patterns, n_distractors, noise)`.
///
/// Only `Medium` comes from published experiments; `Easy` and `Hard` are
/// suite defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub fn params(self) -> (usize, usize, usize, f64) {
        match self {
            Difficulty::Easy => (8, 4, 5, 0.05),
            Difficulty::Medium => (8, 8, 10, 0.10),
            Difficulty::Hard => (8, 16, 20, 0.15),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "easy" => Some(Self::Easy),
            "medium" => Some(Self::Medium),
            "hard" => Some(Self::Hard),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvConfig {
    TraceConditioning(TraceConditioningConfig),
    NoisyPatterning(PatterningConfig),
    TracePatterning(PatterningConfig),
}

impl EnvConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            EnvConfig::TraceConditioning(_) => "trace_conditioning",
            EnvConfig::NoisyPatterning(_) => "noisy_patterning",
            EnvConfig::TracePatterning(_) => "trace_patterning",
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        match self {
            EnvConfig::TraceConditioning(c) => c.validate(),
            EnvConfig::NoisyPatterning(c) | EnvConfig::TracePatterning(c) => c.validate(),
        }
    }

    pub fn isi_bounds(&self) -> (u32, u32) {
        match self {
            EnvConfig::TraceConditioning(c) => (c.isi_low, c.isi_high),
            EnvConfig::NoisyPatterning(c) | EnvConfig::TracePatterning(c) => {
                (c.isi_low, c.isi_high)
            }
        }
    }

    pub fn expected_isi(&self) -> f64 {
        let (lo, hi) = self.isi_bounds();
        (f64::from(lo) + f64::from(hi)) / 2.0
    }

    pub fn us_duration(&self) -> u32 {
        match self {
            EnvConfig::TraceConditioning(c) => c.us_duration,
            EnvConfig::NoisyPatterning(c) | EnvConfig::TracePatterning(c) => c.us_duration,
        }
    }

    /// `(n_cs, n_distractors)`.
    pub fn channel_counts(&self) -> (usize, usize) {
        match self {
            EnvConfig::TraceConditioning(c) => (1, c.distractor_means.len()),
            EnvConfig::NoisyPatterning(c) | EnvConfig::TracePatterning(c) => {
                (c.n_cs, c.n_distractors)
            }
        }
    }

    pub fn n_channels(&self) -> usize {
        let (cs, d) = self.channel_counts();
        cs + 1 + d
    }
}

/// Discount that matches the return horizon to the expected ISI:
/// `1 - 1/E[ISI]`.
pub fn discount_for(config: &EnvConfig) -> f64 {
    let e = config.expected_isi();
    debug_assert!(e >= 1.0);
    1.0 - 1.0 / e
}

#[derive(Debug, Clone)]
enum Inner {
    TraceConditioning(TraceConditioning),
    Patterning(Patterning),
}

/// A seeded environment instance.
#[derive(Debug, Clone)]
pub struct Env {
    config: EnvConfig,
    inner: Inner,
    obs: Observation,
    t: u64,
    trial_onset: bool,
}

impl Env {
    pub fn new(config: &EnvConfig, seed: u64) -> Result<Self, EnvError> {
        config.validate()?;
        let (n_cs, n_d) = config.channel_counts();
        let inner = match config {
            EnvConfig::TraceConditioning(c) => {
                Inner::TraceConditioning(TraceConditioning::new(c.clone(), seed))
            }
            EnvConfig::NoisyPatterning(c) | EnvConfig::TracePatterning(c) => {
                Inner::Patterning(Patterning::new(c.clone(), seed)?)
            }
        };
        Ok(Self {
            config: config.clone(),
            inner,
            obs: Observation::zeros(n_cs, n_d),
            t: 0,
            trial_onset: false,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn n_channels(&self) -> usize {
        self.obs.n_channels()
    }

    pub fn discount(&self) -> f64 {
        discount_for(&self.config)
    }

    /// Advances one step and returns the emitted observation.
    pub fn step(&mut self) -> &Observation {
        self.obs.t = self.t;
        self.trial_onset = match &mut self.inner {
            Inner::TraceConditioning(e) => e.step(self.t, &mut self.obs),
            Inner::Patterning(e) => e.step(self.t, &mut self.obs),
        };
        self.t += 1;
        &self.obs
    }

    /// True when the observation returned by the last `step` was a CS onset.
    pub fn trial_began(&self) -> bool {
        self.trial_onset
    }

    /// Activation patterns of a patterning problem, `None` for trace
    /// conditioning.
    pub fn activation_patterns(&self) -> Option<&[Vec<u8>]> {
        match &self.inner {
            Inner::Patterning(p) => Some(p.activation_patterns()),
            Inner::TraceConditioning(_) => None,
        }
    }
}

/// Draws an integer uniformly from `lo..=hi`.
pub(crate) fn uniform_incl(rng: &mut crate::rng::Rng, lo: u32, hi: u32) -> u32 {
    use rand::Rng;
    rng.random_range(lo..=hi)
}
