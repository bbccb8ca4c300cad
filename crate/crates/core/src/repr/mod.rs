//! Fixed state constructions: presence bits, stimulating traces with tile
//! coding or microstimulus basis functions, and echo state networks.
//!
//! Feature dimensionality is fixed per configuration:
//!
//! | method         | dimension                               |
//! |----------------|-----------------------------------------|
//! | presence       | `channels + 1`                          |
//! | tile coding    | `channels * n_tilings * n_tiles + 1`    |
//! | microstimulus  | `channels * n_rbfs + 1`                 |
//! | ESN            | `hidden + 1`                            |
//!
//! The trailing entry is always a bias fixed at 1.

mod esn;
mod features;
mod microstimulus;
mod tile;
mod traces;

pub use esn::{esn_init, spectral_radius_estimate, Esn, EsnConfig, SparseMatrix};
pub use features::FeatureVector;
pub use microstimulus::{microstimulus_features, microstimulus_features_into};
pub use tile::{tile_coded_features, tile_coded_features_into, TILE_THRESHOLD};
pub use traces::{update_traces, StimTraces};

use crate::envs::Observation;

/// `o`'s channels followed by a bias of 1.
pub fn presence_features(o: &Observation) -> FeatureVector {
    let mut out = FeatureVector::dense(o.n_channels() + 1);
    presence_features_into(o, &mut out);
    out
}

pub fn presence_features_into(o: &Observation, out: &mut FeatureVector) {
    let v = out.dense_values_mut();
    let n = o.n_channels();
    o.write_channels(&mut v[..n]);
    v[n] = 1.0;
}

/// Which fixed construction to use, with its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ReprConfig {
    Presence,
    TileCoded {
        n_tilings: usize,
        n_tiles: usize,
        decay: f64,
    },
    Microstimulus {
        n_rbfs: usize,
        sigma: f64,
        decay: f64,
    },
    Esn(EsnConfig),
}

/// A stateful feature constructor built from a [`ReprConfig`].
#[derive(Debug, Clone)]
pub struct Representation {
    config: ReprConfig,
    traces: Option<StimTraces>,
    esn: Option<Esn>,
    out: FeatureVector,
}

impl Representation {
    pub fn new(config: &ReprConfig, n_channels: usize, seed: u64) -> Self {
        let (traces, esn, out) = match *config {
            ReprConfig::Presence => (None, None, FeatureVector::dense(n_channels + 1)),
            ReprConfig::TileCoded {
                n_tilings,
                n_tiles,
                decay,
            } => (
                Some(StimTraces::new(n_channels, decay)),
                None,
                FeatureVector::sparse(n_channels * n_tilings * n_tiles + 1),
            ),
            ReprConfig::Microstimulus { n_rbfs, decay, .. } => (
                Some(StimTraces::new(n_channels, decay)),
                None,
                FeatureVector::dense(n_channels * n_rbfs + 1),
            ),
            ReprConfig::Esn(ref cfg) => {
                let esn = esn_init(n_channels, cfg, seed);
                let out = FeatureVector::dense(cfg.hidden + 1);
                (None, Some(esn), out)
            }
        };
        Self {
            config: config.clone(),
            traces,
            esn,
            out,
        }
    }

    pub fn dim(&self) -> usize {
        self.out.dim()
    }

    pub fn config(&self) -> &ReprConfig {
        &self.config
    }

    pub fn esn(&self) -> Option<&Esn> {
        self.esn.as_ref()
    }

    /// Builds `x_t` from `o_t`. `v_prev` is the prediction emitted on the
    /// previous step; only the ESN feedback path reads it.
    pub fn features(&mut self, o: &Observation, v_prev: f64) -> &FeatureVector {
        match self.config {
            ReprConfig::Presence => presence_features_into(o, &mut self.out),
            ReprConfig::TileCoded {
                n_tilings, n_tiles, ..
            } => {
                let tr = self.traces.as_mut().expect("trace state");
                tr.update(o);
                tile_coded_features_into(tr.values(), n_tilings, n_tiles, &mut self.out);
            }
            ReprConfig::Microstimulus { n_rbfs, sigma, .. } => {
                let tr = self.traces.as_mut().expect("trace state");
                tr.update(o);
                microstimulus_features_into(tr.values(), n_rbfs, sigma, &mut self.out);
            }
            ReprConfig::Esn(_) => {
                let esn = self.esn.as_mut().expect("esn state");
                esn.step_into(o, v_prev, &mut self.out);
            }
        }
        &self.out
    }
}
