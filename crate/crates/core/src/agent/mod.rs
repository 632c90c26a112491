//! Agents: the two-level h-DQN agent and the flat Q-learning baseline.

mod baseline;
mod checkpoint;
mod hdqn;
mod schedule;
mod tracker;

pub use baseline::FlatAgent;
pub use checkpoint::{load_checkpoint, save_checkpoint, AgentCheckpoint, MAGIC_CHECKPOINT};
pub use hdqn::{update_params, ControllerExploration, HdqnAgent, HdqnSettings, Phase, UpdateSettings};
pub use schedule::{eps_greedy, EpsilonSchedule};
pub use tracker::GoalSuccessTracker;

use crate::critic::GoalId;

/// One option: the goal the meta-controller committed to and how it ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionRecord {
    pub goal: GoalId,
    pub reached: bool,
    pub steps: usize,
    pub extrinsic: f64,
}

/// Log of one episode. Rewards here are extrinsic only.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeTrace {
    pub extrinsic_reward: f64,
    pub steps: usize,
    pub options: Vec<OptionRecord>,
    /// Entries into each agent location, indexed by `Environment::location_index`.
    pub visits: Vec<u32>,
}

impl EpisodeTrace {
    pub(crate) fn new(locations: usize) -> Self {
        Self {
            visits: vec![0; locations],
            ..Self::default()
        }
    }
}
