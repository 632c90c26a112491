use crate::approx::argmax;
use crate::rng::RngStream;

/// Linear annealing from `start` to `floor` over `horizon` steps, flat afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub floor: f64,
    pub horizon: u64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            floor: 0.1,
            horizon: 50_000,
        }
    }
}

impl EpsilonSchedule {
    pub fn new(start: f64, floor: f64, horizon: u64) -> Self {
        Self {
            start,
            floor,
            horizon,
        }
    }

    pub fn value(&self, t: u64) -> f64 {
        if self.horizon == 0 || t >= self.horizon {
            return self.floor;
        }
        let frac = t as f64 / self.horizon as f64;
        (self.start - (self.start - self.floor) * frac).max(self.floor)
    }
}

/// With probability `epsilon` a uniformly random candidate, otherwise the candidate with the
/// largest value (first one on ties). `values` is indexed by candidate id.
///
/// Panics if `candidates` is empty.
pub fn eps_greedy(values: &[f64], candidates: &[usize], epsilon: f64, rng: &mut RngStream) -> usize {
    assert!(!candidates.is_empty(), "eps_greedy needs at least one candidate");
    if rng.uniform() < epsilon {
        return candidates[rng.index(candidates.len())];
    }
    let restricted: Vec<f64> = candidates.iter().map(|&c| values[c]).collect();
    candidates[argmax(&restricted)]
}
