//! Environment contract shared by every task and agent.

pub mod chain;
pub mod keydoor;

pub use chain::{ChainEnv, ChainState};
pub use keydoor::{Entity, EntityKind, KeyDoorEnv, KeyDoorState, Layout};

use crate::critic::GoalTarget;
use crate::error::Result;
use crate::rng::RngStream;

/// Index of a discrete state within an environment's enumerated state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub usize);

/// Index into an environment's enumerated action set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next_state: StateId,
    pub extrinsic_reward: f64,
    pub terminal: bool,
}

/// Where something sits, as seen by the internal critic. Two things "meet" when their
/// locations are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Location(pub usize, pub usize);

/// A discrete, episodic environment.
///
/// After a step returns `terminal == true`, [`Environment::reset`] is the only legal call;
/// stepping again yields [`crate::Error::TerminalStep`].
pub trait Environment {
    fn name(&self) -> &'static str;

    fn reset(&mut self, rng: &mut RngStream) -> StateId;

    fn step(&mut self, action: ActionId, rng: &mut RngStream) -> Result<StepOutcome>;

    fn state_count(&self) -> usize;

    fn action_count(&self) -> usize;

    fn current_state(&self) -> StateId;

    fn is_terminal(&self) -> bool;

    /// The targets intrinsic goals may point at, in a fixed order.
    fn goal_targets(&self) -> Vec<GoalTarget>;

    /// Location of the agent in `state`.
    fn agent_location(&self, state: StateId) -> Location;

    /// Location of a goal target, or `None` when the target is foreign to this environment.
    fn target_location(&self, target: &GoalTarget) -> Option<Location>;

    /// Number of distinct agent locations, used for visit histograms.
    fn location_count(&self) -> usize;

    /// Dense index of a location in `0..location_count()`.
    fn location_index(&self, loc: Location) -> usize;
}
