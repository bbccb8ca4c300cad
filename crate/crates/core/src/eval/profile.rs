use std::collections::BTreeMap;

use super::{PredictionLog, ReturnSeries};
use crate::envs::Observation;

/// One CS-onset-aligned row of a trial profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    /// Index into the log's trial onsets.
    pub trial: usize,
    /// Steps relative to the trial's CS onset.
    pub offset: i64,
    pub step: u64,
    pub us: u8,
    pub cs: Vec<u8>,
    pub distractors: Vec<u8>,
    pub prediction: f64,
    pub ret: f64,
}

/// Aligns the selected trials on their CS onset.
///
/// `observations` replays the run's stream from step 0 (an environment
/// rebuilt from the same seed). Each selected trial yields rows for offsets
/// `-before..=after`, clipped to the log.
pub fn trial_profile<I>(
    observations: I,
    log: &PredictionLog,
    returns: &ReturnSeries,
    trials: &[usize],
    before: usize,
    after: usize,
) -> Vec<ProfileRow>
where
    I: IntoIterator<Item = Observation>,
{
    let n = log.len() as i64;
    let windows: Vec<(usize, i64, i64)> = trials
        .iter()
        .filter_map(|&k| log.trial_onsets.get(k).map(|&t0| (k, t0 as i64)))
        .map(|(k, t0)| (k, (t0 - before as i64).max(0), (t0 + after as i64).min(n - 1)))
        .collect();
    let Some(last) = windows.iter().map(|w| w.2).max() else {
        return Vec::new();
    };

    let mut wanted: BTreeMap<u64, Option<Observation>> = BTreeMap::new();
    for &(_, lo, hi) in &windows {
        for s in lo..=hi {
            wanted.insert(s as u64, None);
        }
    }
    for (t, o) in observations.into_iter().enumerate().take(last as usize + 1) {
        if let Some(slot) = wanted.get_mut(&(t as u64)) {
            *slot = Some(o);
        }
    }

    let mut rows = Vec::new();
    for (k, lo, hi) in windows {
        let t0 = log.trial_onsets[k] as i64;
        for s in lo..=hi {
            let Some(Some(o)) = wanted.get(&(s as u64)) else {
                continue;
            };
            let i = s as usize;
            rows.push(ProfileRow {
                trial: k,
                offset: s - t0,
                step: s as u64,
                us: log.us[i],
                cs: o.cs.clone(),
                distractors: o.distractors.clone(),
                prediction: log.predictions[i],
                ret: returns.g[i],
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{Env, EnvConfig};
    use crate::eval::compute_returns;

    #[test]
    fn offset_zero_is_cs_onset_and_peak_precedes_us() {
        let cfg = EnvConfig::TraceConditioning(Default::default());
        let gamma = crate::envs::discount_for(&cfg);
        let mut env = Env::new(&cfg, 3).unwrap();
        let mut log = PredictionLog::default();
        let mut obs = Vec::new();
        for _ in 0..5000 {
            let o = env.step().clone();
            log.push(0.0, o.us, env.trial_began());
            obs.push(o);
        }
        let returns = compute_returns(&log.us, gamma, 1e-6);
        let trials: Vec<usize> = (1..10).collect();
        let rows = trial_profile(obs, &log, &returns, &trials, 5, 30);
        assert!(!rows.is_empty());
        for k in &trials {
            let tr: Vec<&ProfileRow> = rows.iter().filter(|r| r.trial == *k).collect();
            let zero = tr.iter().find(|r| r.offset == 0).unwrap();
            assert_eq!(zero.cs, vec![1]);
            let before = tr.iter().find(|r| r.offset == -1).unwrap();
            assert_eq!(before.cs, vec![0]);
            let onset = tr.iter().find(|r| r.offset > 0 && r.us == 1).unwrap();
            let pre = tr.iter().find(|r| r.offset == onset.offset - 1).unwrap();
            // Later trials add at most gamma^(iti + isi) worth of return.
            let excess = pre.ret - (1.0 + gamma);
            assert!((0.0..1e-3).contains(&excess), "trial {k}: {}", pre.ret);
        }
    }

    #[test]
    fn empty_selection() {
        let log = PredictionLog::default();
        let r = compute_returns(&[], 0.9, 1e-6);
        assert!(trial_profile(Vec::new(), &log, &r, &[0], 2, 2).is_empty());
    }
}
