use std::cmp::Ordering;
use std::path::Path;

use anyhow::{bail, Result};
use toml::Value;

use super::config::{is_experiment_key, parse_flat, scale_count, FlatConfig, SWEEP_KEYS};
use super::{run_experiment, write_outputs, ConfigError, ExperimentConfig, RunOutput};
use crate::eval::mean_and_se;

/// A base experiment plus a Cartesian grid of overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    base_flat: FlatConfig,
    base: ExperimentConfig,
    /// `(config key, candidate values)`, sorted by key.
    pub grid: Vec<(String, Vec<Value>)>,
    pub selection_runs: u64,
    pub final_runs: u64,
}

/// Phase-1 score of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub values: Vec<Value>,
    pub config: ExperimentConfig,
    pub mean_msre: f64,
    pub se: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub best: usize,
    pub final_config: ExperimentConfig,
    pub finals: Vec<RunOutput>,
    /// Swept numeric keys whose best value sits on the edge of its range.
    pub edge_warnings: Vec<String>,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let flat = parse_flat(text)?;
        let mut base_flat = FlatConfig::new();
        let mut grid = Vec::new();
        let mut selection_runs = 5;
        let mut final_runs = 30;
        for (k, v) in flat {
            if let Some(target) = k.strip_prefix("grid.") {
                if !is_experiment_key(target) || target.starts_with("run.") {
                    return Err(ConfigError::UnknownKey(k));
                }
                match v {
                    Value::Array(a) if !a.is_empty() => grid.push((target.to_string(), a)),
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: k,
                            msg: "expected a non-empty list".into(),
                        })
                    }
                }
            } else if SWEEP_KEYS.contains(&k.as_str()) {
                let n = match v {
                    Value::Integer(n) if n >= 1 => n as u64,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: k,
                            msg: "expected a positive integer".into(),
                        })
                    }
                };
                if k == "sweep.selection_runs" {
                    selection_runs = n;
                } else {
                    final_runs = n;
                }
            } else if is_experiment_key(&k) {
                base_flat.insert(k, v);
            } else {
                return Err(ConfigError::UnknownKey(k));
            }
        }
        let base = ExperimentConfig::from_flat(&base_flat)?;
        let spec = Self {
            base_flat,
            base,
            grid,
            selection_runs,
            final_runs,
        };
        // Surface bad grid values before anything runs.
        spec.points()?;
        Ok(spec)
    }

    pub fn base(&self) -> &ExperimentConfig {
        &self.base
    }

    /// Scales steps of the base and both run counts.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut s = self.clone();
        s.base = self.base.scaled(factor);
        s.base_flat
            .insert("run.steps".into(), Value::Integer(s.base.steps as i64));
        s.selection_runs = scale_count(self.selection_runs, factor, self.selection_runs.min(2));
        s.final_runs = scale_count(self.final_runs, factor, self.final_runs.min(2));
        s
    }

    /// Every grid point in row-major order over the sorted keys, with its
    /// resolved config (selection runs, seeds from run index 0).
    pub fn points(&self) -> Result<Vec<(Vec<Value>, ExperimentConfig)>, ConfigError> {
        let mut combos: Vec<Vec<Value>> = vec![Vec::new()];
        for (_, values) in &self.grid {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    values.iter().map(move |v| {
                        let mut c = c.clone();
                        c.push(v.clone());
                        c
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .map(|values| {
                let mut flat = self.base_flat.clone();
                for ((k, _), v) in self.grid.iter().zip(&values) {
                    flat.insert(k.clone(), v.clone());
                }
                let mut cfg = ExperimentConfig::from_flat(&flat)?;
                cfg.runs = self.selection_runs;
                cfg.first_run = 0;
                cfg.output = self.base.output.clone();
                Ok((values, cfg))
            })
            .collect()
    }
}

fn value_cmp(a: &Value, b: &Value) -> Ordering {
    let num = |v: &Value| match v {
        Value::Integer(i) => Some(*i as f64),
        Value::Float(x) => Some(*x),
        _ => None,
    };
    match (num(a), num(b)) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        _ => a.to_string().cmp(&b.to_string()),
    }
}

fn tuple_cmp(a: &[Value], b: &[Value]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| value_cmp(x, y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Index of the lowest mean MSRE; NaN counts as worst and ties go to the
/// lexicographically smallest hyperparameter tuple.
pub fn select_best(rows: &[(Vec<Value>, f64)]) -> Option<usize> {
    let key = |m: f64| if m.is_nan() { f64::INFINITY } else { m };
    (0..rows.len()).min_by(|&i, &j| {
        key(rows[i].1)
            .total_cmp(&key(rows[j].1))
            .then_with(|| tuple_cmp(&rows[i].0, &rows[j].0))
    })
}

/// Phase 1 scores every grid point with the selection runs; phase 2 reruns
/// the best point with the final runs on fresh seeds (run indices after the
/// selection runs).
pub fn sweep(spec: &SweepSpec, threads: Option<usize>) -> Result<SweepOutcome> {
    let points = spec.points()?;
    if points.is_empty() {
        bail!("empty grid");
    }
    let mut rows = Vec::with_capacity(points.len());
    for (values, cfg) in points {
        let outs = run_experiment(&cfg, threads)?;
        let m: Vec<f64> = outs.iter().map(|o| o.result.msre).collect();
        let (mean_msre, se) = match mean_and_se(&m) {
            Ok(v) => v,
            Err(_) => (m.iter().sum::<f64>() / m.len() as f64, f64::NAN),
        };
        rows.push(SweepRow {
            values,
            config: cfg,
            mean_msre,
            se,
        });
    }
    let keyed: Vec<(Vec<Value>, f64)> =
        rows.iter().map(|r| (r.values.clone(), r.mean_msre)).collect();
    let best = select_best(&keyed).expect("non-empty grid");

    let mut edge_warnings = Vec::new();
    for (axis, (key, values)) in spec.grid.iter().enumerate() {
        if values.len() < 3 || values.iter().any(|v| !matches!(v, Value::Integer(_) | Value::Float(_))) {
            continue;
        }
        let mut sorted = values.clone();
        sorted.sort_by(value_cmp);
        let v = &rows[best].values[axis];
        if value_cmp(v, &sorted[0]).is_eq() || value_cmp(v, sorted.last().unwrap()).is_eq() {
            edge_warnings.push(format!("best {key} = {v} is at the edge of the grid"));
        }
    }

    let mut final_config = rows[best].config.clone();
    final_config.runs = spec.final_runs;
    final_config.first_run = spec.selection_runs;
    let finals = run_experiment(&final_config, threads)?;
    Ok(SweepOutcome {
        rows,
        best,
        final_config,
        finals,
        edge_warnings,
    })
}

/// Writes `sweep.csv` plus the phase-2 artifacts into `dir`.
pub fn write_sweep(dir: &Path, spec: &SweepSpec, outcome: &SweepOutcome) -> Result<()> {
    write_outputs(dir, &outcome.final_config, &outcome.finals)?;
    let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
    let mut header: Vec<String> = spec.grid.iter().map(|(k, _)| k.clone()).collect();
    header.extend(["config_digest", "mean_msre", "se", "selected"].map(String::from));
    w.write_record(&header)?;
    for (i, r) in outcome.rows.iter().enumerate() {
        let mut rec: Vec<String> = r
            .values
            .iter()
            .map(|v| match v {
                Value::String(s) => s.clone(),
                v => v.to_string(),
            })
            .collect();
        rec.push(r.config.digest());
        rec.push(format!("{}", r.mean_msre));
        rec.push(format!("{}", r.se));
        rec.push(u8::from(i == outcome.best).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_expands_in_key_order() {
        let spec = SweepSpec::parse(
            r#"
            problem.kind = "trace_conditioning"
            method.kind = "microstimulus"
            grid.method.step_size = [1e-4, 1e-3]
            grid.method.n_rbfs = [4, 8, 16]
            sweep.selection_runs = 2
            "#,
        )
        .unwrap();
        let pts = spec.points().unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(spec.grid[0].0, "method.n_rbfs");
        assert_eq!(pts[1].0, vec![Value::Integer(4), Value::Float(1e-3)]);
        assert!(pts.iter().all(|p| p.1.runs == 2));
        assert_eq!(spec.final_runs, 30);
    }

    #[test]
    fn bad_grid_keys_are_named() {
        let base = "problem.kind = \"trace_conditioning\"\nmethod.kind = \"presence\"\n";
        let e = SweepSpec::parse(&format!("{base}grid.method.nope = [1]")).unwrap_err();
        assert!(e.to_string().contains("grid.method.nope"));
        let e = SweepSpec::parse(&format!("{base}grid.method.n_rbfs = [4]")).unwrap_err();
        assert!(e.to_string().contains("method.n_rbfs"), "{e}");
        let e = SweepSpec::parse(&format!("{base}grid.method.step_size = []")).unwrap_err();
        assert!(e.to_string().contains("grid.method.step_size"));
    }

    #[test]
    fn ties_break_lexicographically() {
        let rows = vec![
            (vec![Value::Float(1e-3)], 0.5),
            (vec![Value::Float(1e-4)], 0.5),
            (vec![Value::Float(1e-2)], f64::NAN),
        ];
        assert_eq!(select_best(&rows), Some(1));
        let rows = vec![
            (vec![Value::String("lstm".into())], 0.2),
            (vec![Value::String("gru".into())], 0.2),
        ];
        assert_eq!(select_best(&rows), Some(1));
        assert_eq!(select_best(&[(vec![], 3.0)]), Some(0));
    }
}
