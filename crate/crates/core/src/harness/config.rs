//! Experiment configuration files.
//!
//! A config is a TOML document read as a flat map of dotted keys, so
//! `method.cell = "lstm"` and a `[method]` table with `cell = "lstm"` are the
//! same thing. Serialization always writes the flat form, one key per line,
//! with every field spelled out.

use std::collections::BTreeMap;
use std::path::PathBuf;

use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::Value;

use crate::envs::{
    discount_for, Difficulty, EnvConfig, IsiPreset, PatterningConfig, TraceConditioningConfig,
};
use crate::learn::{Engine, RnnLearnerConfig, DEFAULT_LAMBDA};
use crate::repr::{EsnConfig, ReprConfig};
use crate::rnn::CellKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Syntax(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}` does not apply here: {reason}")]
    Inapplicable { key: String, reason: String },
    #[error("missing config key `{0}`")]
    Missing(String),
    #[error("config key `{key}`: {msg}")]
    BadValue { key: String, msg: String },
}

const PROBLEM_KEYS: &[&str] = &[
    "problem.kind",
    "problem.isi",
    "problem.isi_low",
    "problem.isi_high",
    "problem.iti_low",
    "problem.iti_high",
    "problem.cs_duration",
    "problem.us_duration",
    "problem.distractor_means",
    "problem.distractor_duration",
    "problem.difficulty",
    "problem.n_cs",
    "problem.n_patterns",
    "problem.n_distractors",
    "problem.noise",
];

const METHOD_KEYS: &[&str] = &[
    "method.kind",
    "method.step_size",
    "method.lambda",
    "method.n_tilings",
    "method.n_tiles",
    "method.n_rbfs",
    "method.sigma",
    "method.trace_decay",
    "method.hidden",
    "method.spectral_radius",
    "method.input_scaling",
    "method.density",
    "method.cell",
    "method.engine",
    "method.truncation",
    "method.augment",
];

const RUN_KEYS: &[&str] = &[
    "run.steps",
    "run.runs",
    "run.seed",
    "run.first_run",
    "run.output",
    "run.tail_epsilon",
    "run.curve_bin",
    "run.profile_trials",
    "run.profile_before",
    "run.profile_after",
];

pub(crate) const SWEEP_KEYS: &[&str] = &["sweep.selection_runs", "sweep.final_runs"];

/// Keys left out of the digest: they say where and how many, not what.
const UNHASHED: &[&str] = &["run.output", "run.runs", "run.first_run"];

pub(crate) fn is_experiment_key(k: &str) -> bool {
    PROBLEM_KEYS.contains(&k) || METHOD_KEYS.contains(&k) || RUN_KEYS.contains(&k)
}

/// A flat `key -> value` view of a config document.
pub type FlatConfig = BTreeMap<String, Value>;

/// Parses TOML text and flattens nested tables into dotted keys.
pub fn parse_flat(text: &str) -> Result<FlatConfig, ConfigError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    let mut out = FlatConfig::new();
    flatten("", table, &mut out);
    Ok(out)
}

fn flatten(prefix: &str, table: toml::Table, out: &mut FlatConfig) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            v => {
                out.insert(key, v);
            }
        }
    }
}

/// Writes a flat map as `key = value` lines.
pub fn write_flat(map: &FlatConfig) -> String {
    let mut s = String::new();
    for (k, v) in map {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(&v.to_string());
        s.push('\n');
    }
    s
}

/// Typed access to a flat map that remembers which keys were read.
pub(crate) struct Reader<'a> {
    map: &'a FlatConfig,
    used: std::cell::RefCell<Vec<String>>,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(map: &'a FlatConfig) -> Self {
        Self {
            map,
            used: Default::default(),
        }
    }

    fn raw(&self, key: &str) -> Option<&'a Value> {
        let v = self.map.get(key);
        if v.is_some() {
            self.used.borrow_mut().push(key.to_string());
        }
        v
    }

    fn bad(key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    pub(crate) fn str(&self, key: &str) -> Result<Option<&'a str>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(Self::bad(key, "expected a string")),
        }
    }

    pub(crate) fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(Self::bad(key, "expected a number")),
        }
    }

    pub(crate) fn u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(Value::Float(x)) if *x >= 0.0 && x.fract() == 0.0 && *x < 9.0e15 => {
                Ok(Some(*x as u64))
            }
            Some(_) => Err(Self::bad(key, "expected a non-negative integer")),
        }
    }

    fn u32(&self, key: &str) -> Result<Option<u32>, ConfigError> {
        self.u64(key)?
            .map(|v| u32::try_from(v).map_err(|_| Self::bad(key, "value too large")))
            .transpose()
    }

    fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }

    fn bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(Self::bad(key, "expected true or false")),
        }
    }

    fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(Self::bad(key, "expected a list of numbers")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Err(Self::bad(key, "expected a list of numbers")),
        }
    }

    /// Fails on the first key under `prefix` that was never read.
    fn reject_unused(&self, prefix: &str, reason: &str) -> Result<(), ConfigError> {
        let used = self.used.borrow();
        for k in self.map.keys().filter(|k| k.starts_with(prefix)) {
            if !used.iter().any(|u| u == k) {
                return Err(ConfigError::Inapplicable {
                    key: k.clone(),
                    reason: reason.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// How predictions are made.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodConfig {
    Linear {
        repr: ReprConfig,
        lambda: f64,
        step_size: f64,
    },
    Rnn(RnnLearnerConfig),
}

impl MethodConfig {
    /// Short label used in CSV output, e.g. `microstimulus` or
    /// `lstm-tbptt10+traces`.
    pub fn label(&self) -> String {
        match self {
            MethodConfig::Linear { repr, .. } => match repr {
                ReprConfig::Presence => "presence".into(),
                ReprConfig::TileCoded { .. } => "tile_coded".into(),
                ReprConfig::Microstimulus { .. } => "microstimulus".into(),
                ReprConfig::Esn(_) => "esn".into(),
            },
            MethodConfig::Rnn(c) => {
                let engine = match c.engine {
                    Engine::Tbptt { truncation } => format!("tbptt{truncation}"),
                    Engine::Rtrl => "rtrl".into(),
                };
                let aug = if c.augment { "+traces" } else { "" };
                format!("{}-{engine}{aug}", c.cell.name())
            }
        }
    }
}

/// Which trials to export as CS-onset-aligned profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileSpec {
    /// Number of trials, taken from the end of the scored region; 0 disables.
    pub trials: usize,
    pub before: usize,
    pub after: usize,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: EnvConfig,
    pub method: MethodConfig,
    pub steps: u64,
    pub runs: u64,
    pub seed: u64,
    /// Index of the first run; run `i` uses seed `run_seed(seed, first_run + i)`.
    pub first_run: u64,
    pub output: PathBuf,
    pub tail_epsilon: f64,
    pub curve_bin: u64,
    pub profile: ProfileSpec,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let flat = parse_flat(text)?;
        if let Some(k) = flat.keys().find(|k| !is_experiment_key(k)) {
            if k.starts_with("grid.") || k.starts_with("sweep.") {
                return Err(ConfigError::Inapplicable {
                    key: k.clone(),
                    reason: "grid and sweep keys are only read by `sweep`".into(),
                });
            }
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        Self::from_flat(&flat)
    }

    pub fn from_flat(flat: &FlatConfig) -> Result<Self, ConfigError> {
        if let Some(k) = flat.keys().find(|k| !is_experiment_key(k)) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        let r = Reader::new(flat);
        let problem = parse_problem(&r)?;
        problem.validate().map_err(|e| ConfigError::BadValue {
            key: "problem".into(),
            msg: e.to_string(),
        })?;
        let method = parse_method(&r, &problem)?;
        let default_steps = match problem {
            EnvConfig::TracePatterning(_) => 5_000_000,
            _ => 2_000_000,
        };
        let cfg = ExperimentConfig {
            steps: r.u64("run.steps")?.unwrap_or(default_steps),
            runs: r.u64("run.runs")?.unwrap_or(30),
            seed: r.u64("run.seed")?.unwrap_or(0),
            first_run: r.u64("run.first_run")?.unwrap_or(0),
            output: PathBuf::from(r.str("run.output")?.unwrap_or("results")),
            tail_epsilon: r.f64("run.tail_epsilon")?.unwrap_or(1e-6),
            curve_bin: r.u64("run.curve_bin")?.unwrap_or(10_000),
            profile: ProfileSpec {
                trials: r.usize("run.profile_trials")?.unwrap_or(0),
                before: r.usize("run.profile_before")?.unwrap_or(10),
                after: r.usize("run.profile_after")?.unwrap_or(60),
            },
            problem,
            method,
        };
        if cfg.steps == 0 {
            return Err(Reader::bad("run.steps", "must be >= 1"));
        }
        if cfg.runs == 0 {
            return Err(Reader::bad("run.runs", "must be >= 1"));
        }
        if !(cfg.tail_epsilon > 0.0 && cfg.tail_epsilon < 1.0) {
            return Err(Reader::bad("run.tail_epsilon", "must lie in (0, 1)"));
        }
        if cfg.curve_bin == 0 {
            return Err(Reader::bad("run.curve_bin", "must be >= 1"));
        }
        Ok(cfg)
    }

    /// Every field as a flat map.
    pub fn to_flat(&self) -> FlatConfig {
        let mut m = FlatConfig::new();
        let int = |v: u64| Value::Integer(v as i64);
        let mut put = |k: &str, v: Value| {
            m.insert(k.to_string(), v);
        };
        put("problem.kind", Value::String(self.problem.kind_name().into()));
        match &self.problem {
            EnvConfig::TraceConditioning(c) => {
                put("problem.isi_low", int(c.isi_low.into()));
                put("problem.isi_high", int(c.isi_high.into()));
                put("problem.iti_low", int(c.iti_low.into()));
                put("problem.iti_high", int(c.iti_high.into()));
                put("problem.cs_duration", int(c.cs_duration.into()));
                put("problem.us_duration", int(c.us_duration.into()));
                put(
                    "problem.distractor_means",
                    Value::Array(c.distractor_means.iter().map(|&x| Value::Float(x)).collect()),
                );
                put("problem.distractor_duration", int(c.distractor_duration.into()));
            }
            EnvConfig::NoisyPatterning(c) | EnvConfig::TracePatterning(c) => {
                put("problem.n_cs", int(c.n_cs as u64));
                put("problem.n_patterns", int(c.n_patterns as u64));
                put("problem.n_distractors", int(c.n_distractors as u64));
                put("problem.noise", Value::Float(c.noise));
                put("problem.isi_low", int(c.isi_low.into()));
                put("problem.isi_high", int(c.isi_high.into()));
                put("problem.iti_low", int(c.iti_low.into()));
                put("problem.iti_high", int(c.iti_high.into()));
                put("problem.cs_duration", int(c.cs_duration.into()));
                put("problem.us_duration", int(c.us_duration.into()));
            }
        }
        match &self.method {
            MethodConfig::Linear {
                repr,
                lambda,
                step_size,
            } => {
                put("method.step_size", Value::Float(*step_size));
                put("method.lambda", Value::Float(*lambda));
                match repr {
                    ReprConfig::Presence => put("method.kind", Value::String("presence".into())),
                    ReprConfig::TileCoded {
                        n_tilings,
                        n_tiles,
                        decay,
                    } => {
                        put("method.kind", Value::String("tile_coded".into()));
                        put("method.n_tilings", int(*n_tilings as u64));
                        put("method.n_tiles", int(*n_tiles as u64));
                        put("method.trace_decay", Value::Float(*decay));
                    }
                    ReprConfig::Microstimulus {
                        n_rbfs,
                        sigma,
                        decay,
                    } => {
                        put("method.kind", Value::String("microstimulus".into()));
                        put("method.n_rbfs", int(*n_rbfs as u64));
                        put("method.sigma", Value::Float(*sigma));
                        put("method.trace_decay", Value::Float(*decay));
                    }
                    ReprConfig::Esn(e) => {
                        put("method.kind", Value::String("esn".into()));
                        put("method.hidden", int(e.hidden as u64));
                        put("method.spectral_radius", Value::Float(e.spectral_radius));
                        put("method.input_scaling", Value::Float(e.input_scaling));
                        put("method.density", Value::Float(e.density));
                    }
                }
            }
            MethodConfig::Rnn(c) => {
                put("method.kind", Value::String("rnn".into()));
                put("method.step_size", Value::Float(c.step_size));
                put("method.cell", Value::String(c.cell.name().into()));
                put("method.hidden", int(c.hidden as u64));
                match c.engine {
                    Engine::Tbptt { truncation } => {
                        put("method.engine", Value::String("tbptt".into()));
                        put("method.truncation", int(truncation as u64));
                    }
                    Engine::Rtrl => put("method.engine", Value::String("rtrl".into())),
                }
                put("method.augment", Value::Boolean(c.augment));
                if c.augment {
                    put("method.trace_decay", Value::Float(c.trace_decay));
                }
            }
        }
        put("run.steps", int(self.steps));
        put("run.runs", int(self.runs));
        put("run.seed", int(self.seed));
        put("run.first_run", int(self.first_run));
        put(
            "run.output",
            Value::String(self.output.to_string_lossy().into_owned()),
        );
        put("run.tail_epsilon", Value::Float(self.tail_epsilon));
        put("run.curve_bin", int(self.curve_bin));
        put("run.profile_trials", int(self.profile.trials as u64));
        put("run.profile_before", int(self.profile.before as u64));
        put("run.profile_after", int(self.profile.after as u64));
        m
    }

    pub fn serialize(&self) -> String {
        write_flat(&self.to_flat())
    }

    /// First 16 hex digits of the SHA-256 of the serialized config, ignoring
    /// output location and run count.
    pub fn digest(&self) -> String {
        let mut flat = self.to_flat();
        for k in UNHASHED {
            flat.remove(*k);
        }
        let hash = Sha256::digest(write_flat(&flat).as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn gamma(&self) -> f64 {
        discount_for(&self.problem)
    }

    /// Short problem label, e.g. `trace_conditioning(isi=7-13)`.
    pub fn problem_label(&self) -> String {
        let (lo, hi) = self.problem.isi_bounds();
        match &self.problem {
            EnvConfig::NoisyPatterning(c) => format!(
                "noisy_patterning(k={},m={},x={})",
                c.n_patterns, c.n_distractors, c.noise
            ),
            p => format!("{}(isi={lo}-{hi})", p.kind_name()),
        }
    }

    /// Multiplies steps and runs by `factor`, keeping at least one step and
    /// two runs (one if only one was asked for).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut c = self.clone();
        c.steps = scale_count(self.steps, factor, 1);
        c.runs = scale_count(self.runs, factor, self.runs.min(2));
        c
    }
}

pub(crate) fn scale_count(n: u64, factor: f64, floor: u64) -> u64 {
    ((n as f64 * factor).round() as u64).max(floor).max(1)
}

fn parse_problem(r: &Reader) -> Result<EnvConfig, ConfigError> {
    let kind = r
        .str("problem.kind")?
        .ok_or_else(|| ConfigError::Missing("problem.kind".into()))?;
    let isi_preset = |default: IsiPreset| -> Result<(u32, u32), ConfigError> {
        let preset = match r.str("problem.isi")? {
            Some(s) => IsiPreset::parse(s)
                .ok_or_else(|| Reader::bad("problem.isi", "expected short, medium or long"))?,
            None => default,
        };
        let (lo, hi) = preset.bounds();
        Ok((
            r.u32("problem.isi_low")?.unwrap_or(lo),
            r.u32("problem.isi_high")?.unwrap_or(hi),
        ))
    };
    let problem = match kind {
        "trace_conditioning" => {
            let d = TraceConditioningConfig::default();
            let (isi_low, isi_high) = isi_preset(IsiPreset::Short)?;
            EnvConfig::TraceConditioning(TraceConditioningConfig {
                isi_low,
                isi_high,
                iti_low: r.u32("problem.iti_low")?.unwrap_or(d.iti_low),
                iti_high: r.u32("problem.iti_high")?.unwrap_or(d.iti_high),
                cs_duration: r.u32("problem.cs_duration")?.unwrap_or(d.cs_duration),
                us_duration: r.u32("problem.us_duration")?.unwrap_or(d.us_duration),
                distractor_means: r
                    .f64_list("problem.distractor_means")?
                    .unwrap_or(d.distractor_means),
                distractor_duration: r
                    .u32("problem.distractor_duration")?
                    .unwrap_or(d.distractor_duration),
            })
        }
        "noisy_patterning" | "trace_patterning" => {
            let difficulty = match r.str("problem.difficulty")? {
                Some(s) => Difficulty::parse(s).ok_or_else(|| {
                    Reader::bad("problem.difficulty", "expected easy, medium or hard")
                })?,
                None => Difficulty::Medium,
            };
            let base = PatterningConfig::noisy(difficulty);
            let (isi_low, isi_high) = if kind == "trace_patterning" {
                isi_preset(IsiPreset::Short)?
            } else {
                (
                    r.u32("problem.isi_low")?.unwrap_or(base.isi_low),
                    r.u32("problem.isi_high")?.unwrap_or(base.isi_high),
                )
            };
            let c = PatterningConfig {
                n_cs: r.usize("problem.n_cs")?.unwrap_or(base.n_cs),
                n_patterns: r.usize("problem.n_patterns")?.unwrap_or(base.n_patterns),
                n_distractors: r.usize("problem.n_distractors")?.unwrap_or(base.n_distractors),
                noise: r.f64("problem.noise")?.unwrap_or(base.noise),
                isi_low,
                isi_high,
                iti_low: r.u32("problem.iti_low")?.unwrap_or(base.iti_low),
                iti_high: r.u32("problem.iti_high")?.unwrap_or(base.iti_high),
                cs_duration: r.u32("problem.cs_duration")?.unwrap_or(base.cs_duration),
                us_duration: r.u32("problem.us_duration")?.unwrap_or(base.us_duration),
            };
            if kind == "trace_patterning" {
                EnvConfig::TracePatterning(c)
            } else {
                EnvConfig::NoisyPatterning(c)
            }
        }
        _ => {
            return Err(Reader::bad(
                "problem.kind",
                format!("unknown problem `{kind}`"),
            ))
        }
    };
    r.reject_unused("problem.", &format!("not a parameter of {kind}"))?;
    Ok(problem)
}

fn parse_method(r: &Reader, problem: &EnvConfig) -> Result<MethodConfig, ConfigError> {
    let kind = r
        .str("method.kind")?
        .ok_or_else(|| ConfigError::Missing("method.kind".into()))?;
    let step_size = r.f64("method.step_size")?.unwrap_or(1e-3);
    if !(step_size > 0.0) {
        return Err(Reader::bad("method.step_size", "must be > 0"));
    }
    let default_decay = discount_for(problem);
    let decay = || -> Result<f64, ConfigError> {
        let d = r.f64("method.trace_decay")?.unwrap_or(default_decay);
        if !(d > 0.0 && d < 1.0) {
            return Err(Reader::bad("method.trace_decay", "must lie in (0, 1)"));
        }
        Ok(d)
    };
    let positive = |key: &str, v: usize, min: usize| {
        if v < min {
            Err(Reader::bad(key, format!("must be >= {min}")))
        } else {
            Ok(v)
        }
    };
    let method = if kind == "rnn" {
        let cell = match r.str("method.cell")? {
            Some(s) => CellKind::parse(s)
                .ok_or_else(|| Reader::bad("method.cell", "expected vanilla, lstm or gru"))?,
            None => CellKind::Lstm,
        };
        let hidden = positive("method.hidden", r.usize("method.hidden")?.unwrap_or(10), 1)?;
        let engine = match r.str("method.engine")?.unwrap_or("tbptt") {
            "tbptt" => Engine::Tbptt {
                truncation: positive(
                    "method.truncation",
                    r.usize("method.truncation")?.unwrap_or(10),
                    1,
                )?,
            },
            "rtrl" => Engine::Rtrl,
            other => {
                return Err(Reader::bad(
                    "method.engine",
                    format!("expected tbptt or rtrl, got `{other}`"),
                ))
            }
        };
        let augment = r.bool("method.augment")?.unwrap_or(false);
        let trace_decay = if augment { decay()? } else { default_decay };
        MethodConfig::Rnn(RnnLearnerConfig {
            cell,
            hidden,
            engine,
            step_size,
            augment,
            trace_decay,
        })
    } else {
        let lambda = r.f64("method.lambda")?.unwrap_or(DEFAULT_LAMBDA);
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Reader::bad("method.lambda", "must lie in [0, 1]"));
        }
        let repr = match kind {
            "presence" => ReprConfig::Presence,
            "tile_coded" => ReprConfig::TileCoded {
                n_tilings: positive("method.n_tilings", r.usize("method.n_tilings")?.unwrap_or(2), 1)?,
                n_tiles: positive("method.n_tiles", r.usize("method.n_tiles")?.unwrap_or(8), 2)?,
                decay: decay()?,
            },
            "microstimulus" => {
                let sigma = r.f64("method.sigma")?.unwrap_or(0.8);
                if !(sigma > 0.0) {
                    return Err(Reader::bad("method.sigma", "must be > 0"));
                }
                ReprConfig::Microstimulus {
                    n_rbfs: positive("method.n_rbfs", r.usize("method.n_rbfs")?.unwrap_or(8), 1)?,
                    sigma,
                    decay: decay()?,
                }
            }
            "esn" => {
                let e = EsnConfig {
                    hidden: positive("method.hidden", r.usize("method.hidden")?.unwrap_or(100), 1)?,
                    spectral_radius: r.f64("method.spectral_radius")?.unwrap_or(0.9),
                    input_scaling: r.f64("method.input_scaling")?.unwrap_or(0.1),
                    density: r.f64("method.density")?.unwrap_or(0.1),
                };
                if !(e.spectral_radius > 0.0 && e.spectral_radius < 1.0) {
                    return Err(Reader::bad("method.spectral_radius", "must lie in (0, 1)"));
                }
                if !(e.density > 0.0 && e.density <= 1.0) {
                    return Err(Reader::bad("method.density", "must lie in (0, 1]"));
                }
                ReprConfig::Esn(e)
            }
            other => {
                return Err(Reader::bad(
                    "method.kind",
                    format!("unknown method `{other}`"),
                ))
            }
        };
        MethodConfig::Linear {
            repr,
            lambda,
            step_size,
        }
    };
    r.reject_unused("method.", &format!("not a parameter of method.kind = {kind}"))?;
    Ok(method)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LSTM: &str = r#"
        problem.kind = "trace_conditioning"
        problem.isi = "medium"
        method.kind = "rnn"
        method.cell = "lstm"
        method.truncation = 20
        method.step_size = 1e-3
        run.steps = 500000
        run.runs = 10
    "#;

    #[test]
    fn presets_and_defaults_resolve() {
        let c = ExperimentConfig::parse(LSTM).unwrap();
        assert_eq!(c.problem.isi_bounds(), (14, 26));
        assert_eq!(c.method.label(), "lstm-tbptt20");
        assert_eq!(c.steps, 500_000);
        assert_eq!(c.seed, 0);
        let tp = ExperimentConfig::parse(
            "problem.kind = \"trace_patterning\"\nmethod.kind = \"presence\"",
        )
        .unwrap();
        assert_eq!(tp.steps, 5_000_000);
    }

    #[test]
    fn tables_equal_dotted_keys() {
        let a = ExperimentConfig::parse(LSTM).unwrap();
        let b = ExperimentConfig::parse(
            r#"
            [problem]
            kind = "trace_conditioning"
            isi = "medium"
            [method]
            kind = "rnn"
            cell = "lstm"
            truncation = 20
            step_size = 0.001
            [run]
            steps = 500000
            runs = 10
        "#,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn round_trip_all_method_kinds() {
        let methods = [
            "method.kind = \"presence\"\nmethod.step_size = 3e-4",
            "method.kind = \"tile_coded\"\nmethod.n_tiles = 16",
            "method.kind = \"microstimulus\"\nmethod.n_rbfs = 32\nmethod.sigma = 0.5",
            "method.kind = \"esn\"\nmethod.hidden = 1000\nmethod.density = 0.05",
            "method.kind = \"rnn\"\nmethod.cell = \"gru\"\nmethod.engine = \"rtrl\"",
            "method.kind = \"rnn\"\nmethod.augment = true\nmethod.truncation = 5",
        ];
        let problems = [
            "problem.kind = \"trace_conditioning\"\nproblem.isi = \"long\"",
            "problem.kind = \"noisy_patterning\"\nproblem.difficulty = \"hard\"",
            "problem.kind = \"trace_patterning\"\nproblem.isi = \"medium\"\nproblem.noise = 0.2",
        ];
        for m in methods {
            for p in problems {
                let text = format!("{p}\n{m}\nrun.seed = 17\nrun.profile_trials = 3\n");
                let c = ExperimentConfig::parse(&text).unwrap();
                let back = ExperimentConfig::parse(&c.serialize()).unwrap();
                assert_eq!(c, back, "{text}");
                assert_eq!(c.digest(), back.digest());
            }
        }
    }

    #[test]
    fn unknown_and_inapplicable_keys_are_named() {
        let e = ExperimentConfig::parse(&format!("{LSTM}\nmethod.hiden = 4")).unwrap_err();
        assert_eq!(e, ConfigError::UnknownKey("method.hiden".into()));
        assert!(e.to_string().contains("method.hiden"));
        let e = ExperimentConfig::parse(&format!("{LSTM}\nmethod.n_rbfs = 4")).unwrap_err();
        assert!(e.to_string().contains("method.n_rbfs"), "{e}");
        let e = ExperimentConfig::parse(&format!("{LSTM}\nproblem.difficulty = \"easy\""))
            .unwrap_err();
        assert!(e.to_string().contains("problem.difficulty"), "{e}");
        let e = ExperimentConfig::parse(&format!("{LSTM}\ngrid.method.hidden = [1, 2]"))
            .unwrap_err();
        assert!(e.to_string().contains("grid.method.hidden"), "{e}");
        let e = ExperimentConfig::parse("problem.kind = \"trace_conditioning\"").unwrap_err();
        assert_eq!(e, ConfigError::Missing("method.kind".into()));
        let e = ExperimentConfig::parse(
            "problem.kind = \"noisy_patterning\"\nproblem.n_cs = 4\nproblem.n_patterns = 6\nmethod.kind = \"presence\"",
        )
        .unwrap_err();
        assert!(e.to_string().contains("non-activating"), "{e}");
    }

    #[test]
    fn digest_ignores_location_and_run_count() {
        let a = ExperimentConfig::parse(LSTM).unwrap();
        let mut b = a.clone();
        b.output = "elsewhere".into();
        b.runs = 3;
        b.first_run = 5;
        assert_eq!(a.digest(), b.digest());
        b.seed = 1;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 16);
    }

    #[test]
    fn trace_decay_defaults_to_discount() {
        let c = ExperimentConfig::parse(
            "problem.kind = \"trace_conditioning\"\nmethod.kind = \"microstimulus\"",
        )
        .unwrap();
        match c.method {
            MethodConfig::Linear {
                repr: ReprConfig::Microstimulus { decay, .. },
                ..
            } => assert!((decay - 0.9).abs() < 1e-12),
            _ => unreachable!(),
        }
    }

    #[test]
    fn scaling() {
        let c = ExperimentConfig::parse(LSTM).unwrap().scaled(0.01);
        assert_eq!(c.steps, 5000);
        assert_eq!(c.runs, 2);
    }
}
