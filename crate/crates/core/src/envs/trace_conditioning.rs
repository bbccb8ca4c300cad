use rand::Rng as _;

use super::{uniform_incl, EnvError, Observation};
use crate::rng::{seeded_rng, stream, Rng};

/// One CS, one US and a background of independent distractors.
///
/// ISI is measured CS onset to US onset and ITI US onset to the next CS
/// onset; both are integer-uniform on inclusive bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceConditioningConfig {
    pub isi_low: u32,
    pub isi_high: u32,
    pub iti_low: u32,
    pub iti_high: u32,
    pub cs_duration: u32,
    pub us_duration: u32,
    /// Mean steps between onsets, one entry per distractor channel.
    pub distractor_means: Vec<f64>,
    pub distractor_duration: u32,
}

impl Default for TraceConditioningConfig {
    fn default() -> Self {
        Self {
            isi_low: 7,
            isi_high: 13,
            iti_low: 80,
            iti_high: 120,
            cs_duration: 4,
            us_duration: 2,
            distractor_means: (1..=10).map(|i| f64::from(i) * 10.0).collect(),
            distractor_duration: 4,
        }
    }
}

impl TraceConditioningConfig {
    pub fn with_isi(isi_low: u32, isi_high: u32) -> Self {
        Self {
            isi_low,
            isi_high,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: &str| Err(EnvError::InvalidConfig(m.to_string()));
        if self.isi_low < 1 {
            return bad("isi_low must be >= 1");
        }
        if self.isi_high < self.isi_low {
            return bad("isi_high must be >= isi_low");
        }
        if self.iti_high < self.iti_low {
            return bad("iti_high must be >= iti_low");
        }
        if self.iti_low <= self.isi_high {
            return bad("iti_low must exceed isi_high so trials never overlap");
        }
        if self.cs_duration < 1 || self.us_duration < 1 || self.distractor_duration < 1 {
            return bad("stimulus durations must be >= 1");
        }
        if let Some(m) = self.distractor_means.iter().find(|&&m| !(m >= 1.0)) {
            return Err(EnvError::InvalidConfig(format!(
                "distractor mean interval {m} must be >= 1"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub(super) struct TraceConditioning {
    cfg: TraceConditioningConfig,
    rng: Rng,
    next_cs_onset: u64,
    us_onset: Option<u64>,
    cs_left: u32,
    us_left: u32,
    distractor_left: Vec<u32>,
    onset_prob: Vec<f64>,
}

impl TraceConditioning {
    pub(super) fn new(cfg: TraceConditioningConfig, seed: u64) -> Self {
        let mut rng = seeded_rng(seed, stream::ENV);
        // Quiet lead-in of one ITI before the first trial.
        let first = u64::from(uniform_incl(&mut rng, cfg.iti_low, cfg.iti_high));
        let onset_prob = cfg.distractor_means.iter().map(|m| 1.0 / m).collect();
        Self {
            distractor_left: vec![0; cfg.distractor_means.len()],
            onset_prob,
            cfg,
            rng,
            next_cs_onset: first,
            us_onset: None,
            cs_left: 0,
            us_left: 0,
        }
    }

    /// Writes the observation for step `t`; returns true on a CS onset.
    pub(super) fn step(&mut self, t: u64, obs: &mut Observation) -> bool {
        let onset = t == self.next_cs_onset;
        if onset {
            let isi = uniform_incl(&mut self.rng, self.cfg.isi_low, self.cfg.isi_high);
            let iti = uniform_incl(&mut self.rng, self.cfg.iti_low, self.cfg.iti_high);
            let us_at = t + u64::from(isi);
            self.cs_left = self.cfg.cs_duration;
            self.us_onset = Some(us_at);
            self.next_cs_onset = us_at + u64::from(iti);
        }
        if self.us_onset == Some(t) {
            self.us_left = self.cfg.us_duration;
            self.us_onset = None;
        }

        obs.cs[0] = u8::from(self.cs_left > 0);
        obs.us = u8::from(self.us_left > 0);
        self.cs_left = self.cs_left.saturating_sub(1);
        self.us_left = self.us_left.saturating_sub(1);

        for (j, left) in self.distractor_left.iter_mut().enumerate() {
            if self.rng.random_bool(self.onset_prob[j]) {
                *left = self.cfg.distractor_duration;
            }
            obs.distractors[j] = u8::from(*left > 0);
            *left = left.saturating_sub(1);
        }
        onset
    }
}
