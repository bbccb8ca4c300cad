use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;

use super::{ExperimentConfig, MethodConfig};
use crate::envs::Env;
use crate::eval::{score_log, trial_profile, PredictionLog, ProfileRow, RunResult};
use crate::learn::{run_linear_learner, run_rnn_learner, AdamState};
use crate::repr::Representation;
use crate::rng::run_seed;

/// One run's score and, when requested, its trial profile.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub result: RunResult,
    pub profile: Vec<ProfileRow>,
}

/// Runs the learner for run `index` and returns its prediction log.
pub fn run_log(cfg: &ExperimentConfig, index: u64) -> Result<(u64, PredictionLog)> {
    let seed = run_seed(cfg.seed, index);
    let mut env = Env::new(&cfg.problem, seed)?;
    let gamma = env.discount();
    let steps = cfg.steps as usize;
    let log = match &cfg.method {
        MethodConfig::Linear {
            repr,
            lambda,
            step_size,
        } => {
            let mut r = Representation::new(repr, env.n_channels(), seed);
            let mut adam = AdamState::new(r.dim(), *step_size);
            run_linear_learner(&mut env, &mut r, *lambda, gamma, &mut adam, steps)
        }
        MethodConfig::Rnn(rc) => run_rnn_learner(&mut env, rc, gamma, steps, seed),
    };
    Ok((seed, log))
}

/// Runs and scores run `index` (absolute, including `first_run`).
pub fn run_one(cfg: &ExperimentConfig, index: u64) -> Result<RunOutput> {
    let (seed, log) = run_log(cfg, index)?;
    let (returns, msre, curve) = score_log(
        &log,
        cfg.gamma(),
        cfg.tail_epsilon,
        cfg.curve_bin as usize,
    );
    let profile = if cfg.profile.trials > 0 {
        // The last `trials` trials whose window ends inside the scored region.
        let limit = returns.scored as u64;
        let eligible: Vec<usize> = (0..log.trial_onsets.len())
            .filter(|&k| log.trial_onsets[k] + cfg.profile.after as u64 <= limit)
            .collect();
        let chosen = &eligible[eligible.len().saturating_sub(cfg.profile.trials)..];
        let mut env = Env::new(&cfg.problem, seed)?;
        let replay = std::iter::from_fn(move || Some(env.step().clone()));
        trial_profile(
            replay,
            &log,
            &returns,
            chosen,
            cfg.profile.before,
            cfg.profile.after,
        )
    } else {
        Vec::new()
    };
    Ok(RunOutput {
        result: RunResult {
            run_index: index,
            seed,
            config_digest: cfg.digest(),
            steps: cfg.steps,
            msre,
            curve,
        },
        profile,
    })
}

/// Runs every configured run on a pool of `threads` workers (all cores when
/// `None`). Results come back ordered by run index.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<RunOutput>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .context("building worker pool")?;
    let indices: Vec<u64> = (cfg.first_run..cfg.first_run + cfg.runs).collect();
    pool.install(|| indices.par_iter().map(|&i| run_one(cfg, i)).collect())
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Writes `config.cfg`, `runs.csv`, `curves.csv` and, if any rows exist,
/// `profiles.csv` into `dir`.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, outputs: &[RunOutput]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config.cfg"), cfg.serialize())
        .with_context(|| format!("writing {}", dir.join("config.cfg").display()))?;
    let digest = cfg.digest();
    let problem = cfg.problem_label();
    let method = cfg.method.label();

    let mut runs = csv::Writer::from_path(dir.join("runs.csv"))?;
    runs.write_record(["config_digest", "problem", "method", "seed", "steps", "msre"])?;
    for o in outputs {
        let r = &o.result;
        runs.write_record([
            digest.as_str(),
            &problem,
            &method,
            &r.seed.to_string(),
            &r.steps.to_string(),
            &fmt_f64(r.msre),
        ])?;
    }
    runs.flush()?;

    let mut curves = csv::Writer::from_path(dir.join("curves.csv"))?;
    curves.write_record(["config_digest", "seed", "bin_start", "bin_msre"])?;
    for o in outputs {
        for (start, m) in &o.result.curve {
            curves.write_record([
                digest.as_str(),
                &o.result.seed.to_string(),
                &start.to_string(),
                &fmt_f64(*m),
            ])?;
        }
    }
    curves.flush()?;

    if outputs.iter().any(|o| !o.profile.is_empty()) {
        let file = fs::File::create(dir.join("profiles.csv"))?;
        write_profiles(file, &digest, cfg, outputs.iter().map(|o| (o.result.seed, &o.profile[..])))?;
    }
    Ok(())
}

/// Profile rows as CSV: `config_digest, seed, trial, offset, us, cs*, d*,
/// prediction, return`.
pub fn write_profiles<'a, W: Write>(
    out: W,
    digest: &str,
    cfg: &ExperimentConfig,
    runs: impl Iterator<Item = (u64, &'a [ProfileRow])>,
) -> Result<()> {
    let (n_cs, n_d) = cfg.problem.channel_counts();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["config_digest".to_string(), "seed".into(), "trial".into()];
    header.extend(["offset".into(), "us".into()]);
    header.extend((0..n_cs).map(|i| format!("cs{i}")));
    header.extend((0..n_d).map(|i| format!("d{i}")));
    header.extend(["prediction".into(), "return".into()]);
    w.write_record(&header)?;
    for (seed, rows) in runs {
        for r in rows {
            let mut rec = vec![
                digest.to_string(),
                seed.to_string(),
                r.trial.to_string(),
                r.offset.to_string(),
                r.us.to_string(),
            ];
            rec.extend(r.cs.iter().map(|v| v.to_string()));
            rec.extend(r.distractors.iter().map(|v| v.to_string()));
            rec.push(fmt_f64(r.prediction));
            rec.push(fmt_f64(r.ret));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}
