//! Six-state stochastic chain whose terminal reward depends on whether the far end was visited.

use super::{ActionId, Environment, Location, StateId, StepOutcome};
use crate::critic::GoalTarget;
use crate::error::{check_index, Error, Result};
use crate::rng::RngStream;

pub const LEFT: ActionId = ActionId(0);
pub const RIGHT: ActionId = ActionId(1);

const LENGTH: usize = 6;
const START: usize = 2;
const RIGHT_SUCCESS: f64 = 0.5;
const REWARD_VISITED: f64 = 1.0;
const REWARD_DIRECT: f64 = 0.01;

/// Full Markov state of the chain. Positions are 1-based; position 1 is terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainState {
    pub position: usize,
    pub visited_end: bool,
}

#[derive(Debug, Clone)]
pub struct ChainEnv {
    state: ChainState,
    terminal: bool,
    // When set, the visited flag is folded into the observed state (12 states). Only the
    // verification oracle uses this; agents normally see the position alone.
    observe_history: bool,
}

impl Default for ChainEnv {
    fn default() -> Self {
        Self::new()
    }
}

impl ChainEnv {
    pub fn new() -> Self {
        Self {
            state: ChainState {
                position: START,
                visited_end: false,
            },
            terminal: false,
            observe_history: false,
        }
    }

    /// The fully observed variant: state id = (position − 1) + 6·visited.
    pub fn augmented() -> Self {
        Self {
            observe_history: true,
            ..Self::new()
        }
    }

    pub fn length(&self) -> usize {
        LENGTH
    }

    pub fn chain_state(&self) -> ChainState {
        self.state
    }

    pub fn encode(&self, state: ChainState) -> StateId {
        let base = state.position - 1;
        if self.observe_history && state.visited_end {
            StateId(base + LENGTH)
        } else {
            StateId(base)
        }
    }

    /// Position (1-based) encoded in an observed state id.
    pub fn position_of(state: StateId) -> usize {
        state.0 % LENGTH + 1
    }

    /// Transition distribution of the augmented chain: `(probability, next, reward, terminal)`.
    /// Exposed for exact dynamic programming.
    pub fn transitions(state: ChainState, action: ActionId) -> Vec<(f64, ChainState, f64, bool)> {
        let moved = |position: usize| {
            let next = ChainState {
                position,
                visited_end: state.visited_end || position == LENGTH,
            };
            let terminal = position == 1;
            let reward = match (terminal, next.visited_end) {
                (false, _) => 0.0,
                (true, true) => REWARD_VISITED,
                (true, false) => REWARD_DIRECT,
            };
            (next, reward, terminal)
        };
        let left = state.position - 1;
        if action == LEFT {
            let (n, r, t) = moved(left);
            vec![(1.0, n, r, t)]
        } else {
            let right = (state.position + 1).min(LENGTH);
            let (ns, rs, ts) = moved(right);
            let (nf, rf, tf) = moved(left);
            vec![(RIGHT_SUCCESS, ns, rs, ts), (1.0 - RIGHT_SUCCESS, nf, rf, tf)]
        }
    }
}

impl Environment for ChainEnv {
    fn name(&self) -> &'static str {
        "chain"
    }

    fn reset(&mut self, _rng: &mut RngStream) -> StateId {
        self.state = ChainState {
            position: START,
            visited_end: false,
        };
        self.terminal = false;
        self.encode(self.state)
    }

    fn step(&mut self, action: ActionId, rng: &mut RngStream) -> Result<StepOutcome> {
        if self.terminal {
            return Err(Error::TerminalStep);
        }
        check_index("action", action.0, 2)?;
        let position = if action == LEFT {
            self.state.position - 1
        } else if rng.bernoulli(RIGHT_SUCCESS) {
            // No state beyond the far end: a successful `right` there is a self-loop.
            (self.state.position + 1).min(LENGTH)
        } else {
            self.state.position - 1
        };
        self.state.position = position;
        if position == LENGTH {
            self.state.visited_end = true;
        }
        let terminal = position == 1;
        let extrinsic_reward = if !terminal {
            0.0
        } else if self.state.visited_end {
            REWARD_VISITED
        } else {
            REWARD_DIRECT
        };
        self.terminal = terminal;
        Ok(StepOutcome {
            next_state: self.encode(self.state),
            extrinsic_reward,
            terminal,
        })
    }

    fn state_count(&self) -> usize {
        if self.observe_history {
            2 * LENGTH
        } else {
            LENGTH
        }
    }

    fn action_count(&self) -> usize {
        2
    }

    fn current_state(&self) -> StateId {
        self.encode(self.state)
    }

    fn is_terminal(&self) -> bool {
        self.terminal
    }

    fn goal_targets(&self) -> Vec<GoalTarget> {
        (0..LENGTH).map(|i| GoalTarget::State(StateId(i))).collect()
    }

    fn agent_location(&self, state: StateId) -> Location {
        Location(Self::position_of(state) - 1, 0)
    }

    fn target_location(&self, target: &GoalTarget) -> Option<Location> {
        match *target {
            GoalTarget::State(s) if s.0 < LENGTH => Some(Location(s.0, 0)),
            _ => None,
        }
    }

    fn location_count(&self) -> usize {
        LENGTH
    }

    fn location_index(&self, loc: Location) -> usize {
        loc.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> RngStream {
        RngStream::new(11, 0)
    }

    #[test]
    fn reset_starts_at_s2() {
        let mut env = ChainEnv::new();
        let s = env.reset(&mut rng());
        assert_eq!(ChainEnv::position_of(s), 2);
        assert_eq!(env.state_count(), 6);
        assert_eq!(env.action_count(), 2);
    }

    #[test]
    fn left_from_s2_terminates_with_small_reward() {
        let mut env = ChainEnv::new();
        let mut r = rng();
        env.reset(&mut r);
        let out = env.step(LEFT, &mut r).unwrap();
        assert_eq!(ChainEnv::position_of(out.next_state), 1);
        assert!(out.terminal);
        assert_eq!(out.extrinsic_reward, 0.01);
        assert!(matches!(env.step(LEFT, &mut r), Err(Error::TerminalStep)));
    }

    #[test]
    fn right_moves_up_or_down() {
        let mut r = rng();
        let mut seen = [false; 2];
        for _ in 0..200 {
            let mut env = ChainEnv::new();
            env.reset(&mut r);
            let out = env.step(RIGHT, &mut r).unwrap();
            match ChainEnv::position_of(out.next_state) {
                3 => seen[0] = true,
                1 => seen[1] = true,
                p => panic!("unexpected position {p}"),
            }
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn visiting_the_end_pays_one() {
        // Drive right until the far end, then left home.
        let mut r = rng();
        loop {
            let mut env = ChainEnv::new();
            env.reset(&mut r);
            let mut total = 0.0;
            let mut path = vec![2];
            while !env.is_terminal() && !env.chain_state().visited_end {
                let out = env.step(RIGHT, &mut r).unwrap();
                total += out.extrinsic_reward;
                path.push(ChainEnv::position_of(out.next_state));
            }
            if !env.chain_state().visited_end {
                assert_eq!(total, 0.01);
                continue;
            }
            while !env.is_terminal() {
                total += env.step(LEFT, &mut r).unwrap().extrinsic_reward;
            }
            assert_eq!(total, 1.0);
            break;
        }
    }

    #[test]
    fn right_at_far_end_self_loops_or_falls_back() {
        let s6 = ChainState {
            position: 6,
            visited_end: true,
        };
        let t = ChainEnv::transitions(s6, RIGHT);
        assert_eq!(t[0].1.position, 6);
        assert_eq!(t[1].1.position, 5);
    }

    #[test]
    fn augmented_encoding() {
        let env = ChainEnv::augmented();
        assert_eq!(env.state_count(), 12);
        let s = env.encode(ChainState {
            position: 3,
            visited_end: true,
        });
        assert_eq!(s, StateId(8));
        assert_eq!(ChainEnv::position_of(s), 3);
    }
}
