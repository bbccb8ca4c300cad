use crate::envs::Observation;

/// Stimulating traces: one exponentially decaying memory per channel, reset
/// to 1 on a 0→1 transition of the raw channel.
///
/// Decay continues while a stimulus stays on, so the trace encodes time since
/// onset rather than presence.
#[derive(Debug, Clone, PartialEq)]
pub struct StimTraces {
    y: Vec<f64>,
    prev: Vec<u8>,
    tau: f64,
}

impl StimTraces {
    pub fn new(n_channels: usize, tau: f64) -> Self {
        debug_assert!(tau > 0.0 && tau < 1.0);
        Self {
            y: vec![0.0; n_channels],
            prev: vec![0; n_channels],
            tau,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn update(&mut self, o: &Observation) {
        debug_assert_eq!(o.n_channels(), self.y.len());
        for ((y, prev), raw) in self.y.iter_mut().zip(self.prev.iter_mut()).zip(o.channels()) {
            if raw == 1 && *prev == 0 {
                *y = 1.0;
            } else {
                *y *= self.tau;
            }
            *prev = raw;
        }
    }
}

/// Functional form of [`StimTraces::update`].
pub fn update_traces(mut s: StimTraces, o: &Observation) -> StimTraces {
    s.update(o);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(v: u8) -> Observation {
        Observation {
            t: 0,
            us: 0,
            cs: vec![v],
            distractors: vec![],
        }
    }

    fn at(y: f64, prev: u8, tau: f64) -> StimTraces {
        StimTraces {
            y: vec![y, 0.0],
            prev: vec![prev, 0],
            tau,
        }
    }

    #[test]
    fn examples() {
        let s = update_traces(at(1.0, 1, 0.9), &single(1));
        assert_eq!(s.values()[0], 0.9);
        let s = update_traces(at(0.3, 0, 0.9), &single(1));
        assert_eq!(s.values()[0], 1.0);
        let s = update_traces(at(0.0, 0, 0.37), &single(0));
        assert_eq!(s.values()[0], 0.0);
    }

    #[test]
    fn decays_geometrically_between_onsets() {
        let tau = 0.95;
        let mut s = StimTraces::new(2, tau);
        s.update(&single(1));
        let y0 = s.values()[0];
        for k in 1..=60 {
            s.update(&single(if k < 4 { 1 } else { 0 }));
            let expect = y0 * tau.powi(k);
            assert!((s.values()[0] - expect).abs() <= 1e-13 * expect.max(1e-300));
        }
        s.update(&single(1));
        assert_eq!(s.values()[0], 1.0);
    }
}
