//! Flat ε-greedy tabular Q-learning with online backups and no intrinsic reward.

use super::{eps_greedy, EpisodeTrace, EpsilonSchedule};
use crate::approx::{QTable, Sample, ValueFunction};
use crate::env::{ActionId, Environment};
use crate::error::Result;
use crate::rng::{streams, RngStream};

#[derive(Debug, Clone)]
pub struct FlatAgent {
    q: QTable,
    epsilon: EpsilonSchedule,
    gamma: f64,
    steps: u64,
    rng: RngStream,
}

impl FlatAgent {
    pub fn new(states: usize, actions: usize, alpha: f64, gamma: f64, epsilon: EpsilonSchedule, seed: u64) -> Self {
        Self::from_table(QTable::new(states, 0, actions, alpha), gamma, epsilon, seed)
    }

    pub fn from_table(q: QTable, gamma: f64, epsilon: EpsilonSchedule, seed: u64) -> Self {
        Self {
            q,
            epsilon,
            gamma,
            steps: 0,
            rng: RngStream::new(seed, streams::CONTROLLER),
        }
    }

    pub fn table(&self) -> &QTable {
        &self.q
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub(crate) fn set_steps(&mut self, steps: u64) {
        self.steps = steps;
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.value(self.steps)
    }

    /// One learning episode; ε anneals per primitive step.
    pub fn run_episode<E: Environment + ?Sized>(&mut self, env: &mut E, env_rng: &mut RngStream) -> Result<EpisodeTrace> {
        let actions: Vec<usize> = (0..self.q.output_count()).collect();
        let mut trace = EpisodeTrace::new(env.location_count());
        let mut state = env.reset(env_rng);
        loop {
            let values = self.q.evaluate(state, None)?;
            let eps = self.epsilon();
            let action = eps_greedy(&values, &actions, eps, &mut self.rng);
            let out = env.step(ActionId(action), env_rng)?;
            self.q.backup(
                &Sample {
                    state,
                    goal: None,
                    choice: action,
                    reward: out.extrinsic_reward,
                    next_state: out.next_state,
                    terminal: out.terminal,
                },
                self.gamma,
            )?;
            self.steps += 1;
            trace.extrinsic_reward += out.extrinsic_reward;
            trace.steps += 1;
            trace.visits[env.location_index(env.agent_location(out.next_state))] += 1;
            state = out.next_state;
            if out.terminal {
                return Ok(trace);
            }
        }
    }

    /// Frozen-policy rollout with fixed exploration.
    pub fn rollout<E: Environment + ?Sized>(
        &self,
        env: &mut E,
        epsilon: f64,
        env_rng: &mut RngStream,
        eval_rng: &mut RngStream,
    ) -> Result<EpisodeTrace> {
        let actions: Vec<usize> = (0..self.q.output_count()).collect();
        let mut trace = EpisodeTrace::new(env.location_count());
        let mut state = env.reset(env_rng);
        loop {
            let values = self.q.evaluate(state, None)?;
            let action = eps_greedy(&values, &actions, epsilon, eval_rng);
            let out = env.step(ActionId(action), env_rng)?;
            trace.extrinsic_reward += out.extrinsic_reward;
            trace.steps += 1;
            trace.visits[env.location_index(env.agent_location(out.next_state))] += 1;
            state = out.next_state;
            if out.terminal {
                return Ok(trace);
            }
        }
    }
}
