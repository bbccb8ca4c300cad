use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::eval::mean_and_se;

/// Mean MSRE of one configuration across its runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub problem: String,
    pub method: String,
    pub config_digest: String,
    pub n: usize,
    pub mean: f64,
    /// `NaN` with a single run.
    pub se: f64,
}

fn find_runs(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let p = e.path();
        if p.is_dir() {
            find_runs(&p, out)?;
        } else if p.file_name().is_some_and(|n| n == "runs.csv") {
            out.push(p);
        }
    }
    Ok(())
}

/// Reads every `runs.csv` under `dir` and groups runs by
/// `(problem, method, config_digest)`.
pub fn aggregate_dir(dir: &Path) -> Result<Vec<AggregateRow>> {
    if !dir.is_dir() {
        bail!("directory not found: {}", dir.display());
    }
    let mut files = Vec::new();
    find_runs(dir, &mut files)?;
    if files.is_empty() {
        bail!("no runs.csv under {}", dir.display());
    }
    let mut groups: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
    for f in files {
        let mut rdr = csv::Reader::from_path(&f).with_context(|| format!("reading {}", f.display()))?;
        let h = rdr.headers()?.clone();
        let col = |name: &str| {
            h.iter()
                .position(|c| c == name)
                .with_context(|| format!("{}: missing column `{name}`", f.display()))
        };
        let (cd, cp, cm, cv) = (col("config_digest")?, col("problem")?, col("method")?, col("msre")?);
        for rec in rdr.records() {
            let rec = rec?;
            let msre: f64 = rec[cv]
                .parse()
                .with_context(|| format!("{}: bad msre `{}`", f.display(), &rec[cv]))?;
            groups
                .entry((rec[cp].to_string(), rec[cm].to_string(), rec[cd].to_string()))
                .or_default()
                .push(msre);
        }
    }
    Ok(groups
        .into_iter()
        .map(|((problem, method, config_digest), v)| {
            let (mean, se) = mean_and_se(&v)
                .unwrap_or_else(|_| (v.iter().sum::<f64>() / v.len() as f64, f64::NAN));
            AggregateRow {
                problem,
                method,
                config_digest,
                n: v.len(),
                mean,
                se,
            }
        })
        .collect())
}
