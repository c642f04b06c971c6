use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

/// How electron `T1` events act on the `mS=1 ↔ mS=0` telegraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FlipModel {
    /// Every event toggles the electron between the two manifolds.
    #[default]
    Symmetric,
    /// Only `1 → 0`; the first event is final.
    OneSided,
}

/// Event times of a Poisson process with rate `1/t1_e` on `[0, horizon]`,
/// sorted. Deterministic for a given seed.
pub fn sample_t1_flips(t1_e: f64, horizon: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_flips_with(&mut rng, t1_e, horizon)
}

pub fn sample_flips_with<R: Rng + ?Sized>(rng: &mut R, t1_e: f64, horizon: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(horizon > 0.0) || !(t1_e > 0.0) || t1_e.is_infinite() {
        return out;
    }
    let exp = Exp::new(1.0 / t1_e).expect("positive finite rate");
    let mut t = 0.0;
    loop {
        t += exp.sample(rng);
        if t > horizon {
            break;
        }
        out.push(t);
    }
    out
}

/// Piecewise-constant electron manifold history.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectronHistory {
    /// Times at which the manifold changes.
    pub switches: Vec<f64>,
    pub starts_in_ms1: bool,
}

impl ElectronHistory {
    pub fn from_events(events: Vec<f64>, model: FlipModel) -> Self {
        let switches = match model {
            FlipModel::Symmetric => events,
            FlipModel::OneSided => events.into_iter().take(1).collect(),
        };
        ElectronHistory {
            switches,
            starts_in_ms1: true,
        }
    }

    pub fn in_ms1(&self, t: f64) -> bool {
        let n = self.switches.partition_point(|&s| s <= t);
        self.starts_in_ms1 ^ (n % 2 == 1)
    }

    pub fn flipped_before(&self, t: f64) -> bool {
        self.switches.first().is_some_and(|&s| s <= t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_horizon() {
        assert!(sample_t1_flips(3.3e-3, 0.0, 1).is_empty());
        assert!(sample_t1_flips(f64::INFINITY, 1.0, 1).is_empty());
    }

    #[test]
    fn sorted_bounded_deterministic() {
        let a = sample_t1_flips(1e-3, 10e-3, 42);
        assert_eq!(a, sample_t1_flips(1e-3, 10e-3, 42));
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.iter().all(|&t| (0.0..=10e-3).contains(&t)));
        assert_ne!(a, sample_t1_flips(1e-3, 10e-3, 43));
    }

    #[test]
    fn history_toggles() {
        let h = ElectronHistory::from_events(vec![1.0, 2.0], FlipModel::Symmetric);
        assert!(h.in_ms1(0.5) && !h.in_ms1(1.5) && h.in_ms1(2.5));
        let h = ElectronHistory::from_events(vec![1.0, 2.0], FlipModel::OneSided);
        assert!(h.in_ms1(0.5) && !h.in_ms1(1.5) && !h.in_ms1(2.5));
    }
}
