/// Default truncation tolerance for the unscored tail.
pub const DEFAULT_TAIL_EPSILON: f64 = 1e-6;

/// Realized returns `G_t = sum_k gamma^k US_{t+k+1}` aligned with a log.
///
/// Only the first `scored` entries are used for scoring; the last
/// `tail_length(gamma, tail_epsilon)` entries lack enough future to be exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub g: Vec<f64>,
    pub gamma: f64,
    pub tail_epsilon: f64,
    pub scored: usize,
}

/// `ceil(ln(eps) / ln(gamma))`, and 1 when `gamma = 0` (the final step has no
/// observed successor).
pub fn tail_length(gamma: f64, tail_epsilon: f64) -> usize {
    if gamma <= 0.0 {
        return 1;
    }
    (tail_epsilon.ln() / gamma.ln()).ceil().max(1.0) as usize
}

/// Backward recursion `G_t = US_{t+1} + gamma G_{t+1}` with `G_last = 0`.
pub fn compute_returns(us: &[u8], gamma: f64, tail_epsilon: f64) -> ReturnSeries {
    assert!((0.0..1.0).contains(&gamma), "gamma must lie in [0, 1)");
    let n = us.len();
    let mut g = vec![0.0; n];
    for t in (0..n.saturating_sub(1)).rev() {
        g[t] = f64::from(us[t + 1]) + gamma * g[t + 1];
    }
    let scored = n.saturating_sub(tail_length(gamma, tail_epsilon));
    ReturnSeries {
        g,
        gamma,
        tail_epsilon,
        scored,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::Rng;

    /// Direct forward summation.
    fn brute(us: &[u8], gamma: f64) -> Vec<f64> {
        (0..us.len())
            .map(|t| {
                let mut s = 0.0;
                let mut d = 1.0;
                for u in &us[t + 1..] {
                    s += d * f64::from(*u);
                    d *= gamma;
                }
                s
            })
            .collect()
    }

    #[test]
    fn hand_expansion() {
        let mut us = vec![0u8, 0, 1, 1];
        us.extend(std::iter::repeat(0).take(60));
        let r = compute_returns(&us, 0.75, 1e-6);
        assert!((r.g[0] - 1.3125).abs() < 1e-15);
        assert!((r.g[1] - 1.75).abs() < 1e-15);
        assert!((r.g[2] - 1.0).abs() < 1e-15);
        assert_eq!(r.g[3], 0.0);
        assert_eq!(tail_length(0.75, 1e-6), 49);
        assert_eq!(r.scored, 64 - 49);
    }

    #[test]
    fn all_zero_us() {
        let r = compute_returns(&[0; 50], 0.9, 1e-6);
        assert!(r.g.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn matches_forward_sums() {
        let mut rng = seeded_rng(1, 1);
        for i in 0..200 {
            let gamma = [0.75, 0.9, 0.95][i % 3];
            let us: Vec<u8> = (0..200).map(|_| rng.random_bool(0.2) as u8).collect();
            let r = compute_returns(&us, gamma, 1e-6);
            for (a, b) in r.g.iter().zip(brute(&us, gamma)) {
                assert!((a - b).abs() < 1e-9);
            }
            assert!(r.g.iter().all(|&g| g >= 0.0 && g <= 1.0 / (1.0 - gamma)));
        }
    }

    #[test]
    fn tail_error_bound() {
        // Truncating the tail loses at most gamma^H / (1 - gamma) <= eps / (1 - gamma).
        for gamma in [0.75, 0.9, 0.95, 0.9666] {
            let h = tail_length(gamma, 1e-6);
            assert!(gamma.powi(h as i32) <= 1e-6);
            assert!(gamma.powi(h as i32 - 1) > 1e-6);
        }
        assert_eq!(tail_length(0.0, 1e-6), 1);
    }
}
