use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use condbench::harness::{
    aggregate_dir, run_experiment, run_one, sweep, write_outputs, write_profiles, write_sweep,
    ExperimentConfig, SweepSpec,
};

#[derive(Parser)]
#[command(name = "condbench", version, about = "Online multi-step prediction benchmarks")]
struct Cli {
    /// Worker threads for independent runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Multiply steps and run counts, e.g. 0.01 for a smoke test.
    #[arg(long, global = true)]
    scale: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one configured experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `run.output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid search, then rerun the best point.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean MSRE and standard error per configuration.
    Aggregate {
        #[arg(long)]
        dir: PathBuf,
    },
    /// CS-onset-aligned rows for one run of a finished experiment, as CSV on
    /// stdout.
    Profile {
        /// Run index within the experiment.
        #[arg(long)]
        run: u64,
        /// How many trials, counted back from the end of the scored region.
        #[arg(long)]
        trials: usize,
        /// Experiment output directory holding `config.cfg`.
        #[arg(long, default_value = "results")]
        dir: PathBuf,
        #[arg(long)]
        before: Option<usize>,
        #[arg(long)]
        after: Option<usize>,
    },
}

fn read_config(path: &Path) -> Result<String> {
    if !path.is_file() {
        bail!("config not found: {}", path.display());
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn check_scale(scale: Option<f64>) -> Result<Option<f64>> {
    match scale {
        Some(s) if !(s > 0.0 && s.is_finite()) => bail!("--scale must be a positive number"),
        s => Ok(s),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let scale = check_scale(cli.scale)?;
    match cli.cmd {
        Cmd::Run { config, out } => {
            let mut cfg = ExperimentConfig::parse(&read_config(&config)?)?;
            if let Some(s) = scale {
                cfg = cfg.scaled(s);
            }
            if let Some(o) = out {
                cfg.output = o;
            }
            let outputs = run_experiment(&cfg, cli.threads)?;
            write_outputs(&cfg.output, &cfg, &outputs)?;
            for o in &outputs {
                println!("run {} seed {} msre {}", o.result.run_index, o.result.seed, o.result.msre);
            }
            println!("wrote {}", cfg.output.display());
        }
        Cmd::Sweep { config, out } => {
            let mut spec = SweepSpec::parse(&read_config(&config)?)?;
            if let Some(s) = scale {
                spec = spec.scaled(s);
            }
            let dir = out.unwrap_or_else(|| spec.base().output.clone());
            let outcome = sweep(&spec, cli.threads)?;
            write_sweep(&dir, &spec, &outcome)?;
            for w in &outcome.edge_warnings {
                eprintln!("warning: {w}");
            }
            let best = &outcome.rows[outcome.best];
            println!(
                "selected {} (selection mean msre {})",
                best.config.digest(),
                best.mean_msre
            );
            println!("wrote {}", dir.display());
        }
        Cmd::Aggregate { dir } => {
            for r in aggregate_dir(&dir)? {
                println!(
                    "{}\t{}\t{}\tn={}\t{:.6} ± {:.6}",
                    r.problem, r.method, r.config_digest, r.n, r.mean, r.se
                );
            }
        }
        Cmd::Profile {
            run,
            trials,
            dir,
            before,
            after,
        } => {
            let mut cfg = ExperimentConfig::parse(&read_config(&dir.join("config.cfg"))?)?;
            if run >= cfg.runs {
                bail!("run {run} out of range: the experiment has {} runs", cfg.runs);
            }
            cfg.profile.trials = trials;
            if let Some(b) = before {
                cfg.profile.before = b;
            }
            if let Some(a) = after {
                cfg.profile.after = a;
            }
            let out = run_one(&cfg, cfg.first_run + run)?;
            let stdout = io::stdout().lock();
            write_profiles(
                stdout,
                &out.result.config_digest,
                &cfg,
                std::iter::once((out.result.seed, &out.profile[..])),
            )?;
        }
    }
    Ok(())
}
