//! Exact solution of the chain task on its fully observed (12-state) form, plus a sampled
//! tabular Q-learning run against it.

use crate::approx::{QTable, Sample};
use crate::env::chain::{LEFT, RIGHT};
use crate::env::{ActionId, ChainEnv, ChainState, StateId};
use crate::error::Result;
use crate::rng::RngStream;

pub const AUGMENTED_STATES: usize = 12;
pub const TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSolution {
    pub gamma: f64,
    /// Indexed by augmented state id: (position − 1) + 6·visited.
    pub values: Vec<f64>,
    /// `q[s][a]` with a = 0 (left), 1 (right).
    pub q: Vec<[f64; 2]>,
    pub policy: Vec<ActionId>,
    pub iterations: usize,
    pub residual: f64,
}

impl ChainSolution {
    /// Value of the start state (position 2, end not yet visited).
    pub fn start_value(&self) -> f64 {
        self.values[1]
    }
}

pub fn augmented_state(id: usize) -> ChainState {
    ChainState {
        position: id % 6 + 1,
        visited_end: id >= 6,
    }
}

fn is_terminal(id: usize) -> bool {
    id % 6 == 0
}

fn backup(values: &[f64], id: usize, action: ActionId, gamma: f64) -> f64 {
    let env = ChainEnv::augmented();
    ChainEnv::transitions(augmented_state(id), action)
        .into_iter()
        .map(|(p, next, r, t)| {
            let v = if t { 0.0 } else { values[env.encode(next).0] };
            p * (r + gamma * v)
        })
        .sum()
}

/// Value iteration until the sup-norm change drops below [`TOLERANCE`]. Every policy
/// terminates with probability one, so `gamma = 1` is admissible.
pub fn solve_chain(gamma: f64) -> ChainSolution {
    let mut values = vec![0.0; AUGMENTED_STATES];
    let mut iterations = 0;
    let residual = loop {
        iterations += 1;
        let mut delta: f64 = 0.0;
        let next: Vec<f64> = (0..AUGMENTED_STATES)
            .map(|s| {
                if is_terminal(s) {
                    return 0.0;
                }
                backup(&values, s, LEFT, gamma).max(backup(&values, s, RIGHT, gamma))
            })
            .collect();
        for (a, b) in values.iter().zip(&next) {
            delta = delta.max((a - b).abs());
        }
        values = next;
        if delta < TOLERANCE || iterations >= 1_000_000 {
            break delta;
        }
    };
    let q: Vec<[f64; 2]> = (0..AUGMENTED_STATES)
        .map(|s| {
            if is_terminal(s) {
                [0.0, 0.0]
            } else {
                [backup(&values, s, LEFT, gamma), backup(&values, s, RIGHT, gamma)]
            }
        })
        .collect();
    let policy = q
        .iter()
        .map(|qs| if qs[1] > qs[0] { RIGHT } else { LEFT })
        .collect();
    ChainSolution {
        gamma,
        values,
        q,
        policy,
        iterations,
        residual,
    }
}

/// Synchronous sampled Q-learning on the augmented chain: every sweep draws one
/// transition for each non-terminal (state, action) pair from the simulator and applies
/// a backup with step size `c / (c + n)`, n being the pair's update count.
pub fn sampled_q_learning(gamma: f64, sweeps: usize, c: f64, seed: u64) -> Result<QTable> {
    let env = ChainEnv::augmented();
    let mut table = QTable::new(AUGMENTED_STATES, 0, 2, 1.0);
    let mut rng = RngStream::new(seed, crate::rng::streams::ENV);
    for n in 0..sweeps {
        let rate = c / (c + n as f64);
        for s in (0..AUGMENTED_STATES).filter(|&s| !is_terminal(s)) {
            for action in [LEFT, RIGHT] {
                let outcomes = ChainEnv::transitions(augmented_state(s), action);
                let (_, next, reward, terminal) = if outcomes.len() == 1 {
                    outcomes[0]
                } else if rng.bernoulli(outcomes[0].0) {
                    outcomes[0]
                } else {
                    outcomes[1]
                };
                table.backup_with_rate(
                    &Sample {
                        state: StateId(s),
                        goal: None,
                        choice: action.0,
                        reward,
                        next_state: env.encode(next),
                        terminal,
                    },
                    gamma,
                    rate,
                )?;
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_value_matches_gamblers_ruin() {
        // From position 3 the walk hits 6 before 1 with probability 2/5 under `right`.
        let sol = solve_chain(1.0);
        let expect = 0.5 * (0.4 + 0.6 * 0.01) + 0.5 * 0.01;
        assert!((sol.start_value() - expect).abs() < 1e-9);
        assert!(sol.residual < TOLERANCE);
    }

    #[test]
    fn optimal_policy_goes_out_then_home() {
        let sol = solve_chain(1.0);
        for s in 1..6 {
            assert_eq!(sol.policy[s], RIGHT, "unvisited position {}", s + 1);
        }
        for s in 7..12 {
            assert_eq!(sol.policy[s], LEFT, "visited position {}", s - 5);
            assert!((sol.values[s] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn discounting_lowers_values() {
        assert!(solve_chain(0.9).start_value() < solve_chain(1.0).start_value());
    }
}
