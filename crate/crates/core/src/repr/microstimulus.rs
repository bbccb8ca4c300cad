use super::FeatureVector;

/// Gaussian basis functions over each trace's height, scaled by the trace:
/// `x = y * exp(-(y - mu_j)^2 / (2 sigma^2))` with `mu_j = j / n_rbfs`,
/// `j = 1..=n_rbfs`. Feature `c * n_rbfs + (j - 1)` belongs to channel `c`.
pub fn microstimulus_features(traces: &[f64], n_rbfs: usize, sigma: f64) -> FeatureVector {
    let mut out = FeatureVector::dense(traces.len() * n_rbfs + 1);
    microstimulus_features_into(traces, n_rbfs, sigma, &mut out);
    out
}

pub fn microstimulus_features_into(
    traces: &[f64],
    n_rbfs: usize,
    sigma: f64,
    out: &mut FeatureVector,
) {
    debug_assert!(n_rbfs >= 1 && sigma > 0.0);
    let v = out.dense_values_mut();
    debug_assert_eq!(v.len(), traces.len() * n_rbfs + 1);
    let inv = 1.0 / (2.0 * sigma * sigma);
    for (c, &y) in traces.iter().enumerate() {
        let block = &mut v[c * n_rbfs..(c + 1) * n_rbfs];
        if y == 0.0 {
            block.fill(0.0);
            continue;
        }
        for (j, x) in block.iter_mut().enumerate() {
            let mu = (j + 1) as f64 / n_rbfs as f64;
            let d = y - mu;
            *x = y * (-d * d * inv).exp();
        }
    }
    let last = v.len() - 1;
    v[last] = 1.0;
}
