//! Internal critic: the goal space and the intrinsic reward for reaching a goal.
//!
//! A goal is a relation `⟨agent, reaches, target⟩`. The critic only checks the configuration
//! of entities after a step; it knows nothing about game rules such as the door needing the
//! key, so the meta-controller has to learn goal ordering from extrinsic reward alone.

use crate::env::{ActionId, EntityKind, Environment, StateId};
use crate::error::{Error, Result};

/// Intrinsic reward paid when the current goal is reached.
pub const INTRINSIC_REWARD: f64 = 1.0;

/// Stable index of a goal in an environment's goal set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GoalId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GoalTarget {
    /// A discrete state of the environment (chain task).
    State(StateId),
    /// A scene entity (key-door task).
    Entity(EntityKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Reaches,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GoalSpec {
    pub subject: EntityKind,
    pub relation: Relation,
    pub target: GoalTarget,
}

impl GoalSpec {
    pub fn reaches(target: GoalTarget) -> Self {
        Self {
            subject: EntityKind::Agent,
            relation: Relation::Reaches,
            target,
        }
    }

    /// Short label used in metric files: `s1`..`s6` or the entity name.
    pub fn label(&self) -> String {
        match self.target {
            GoalTarget::State(s) => format!("s{}", s.0 + 1),
            GoalTarget::Entity(kind) => kind.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticVerdict {
    pub reached: bool,
    pub intrinsic_reward: f64,
}

/// The fixed, ordered goal set of one environment.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalCritic {
    goals: Vec<GoalSpec>,
}

impl InternalCritic {
    pub fn for_env<E: Environment + ?Sized>(env: &E) -> Self {
        Self {
            goals: goal_set(env),
        }
    }

    pub fn goals(&self) -> &[GoalSpec] {
        &self.goals
    }

    pub fn goal_count(&self) -> usize {
        self.goals.len()
    }

    pub fn goal(&self, id: GoalId) -> Result<&GoalSpec> {
        self.goals.get(id.0).ok_or(Error::UnknownGoal(id.0))
    }

    pub fn id_of(&self, spec: &GoalSpec) -> Option<GoalId> {
        self.goals.iter().position(|g| g == spec).map(GoalId)
    }

    /// Judge one primitive transition against goal `goal`. Only the post-step state matters.
    pub fn evaluate<E: Environment + ?Sized>(
        &self,
        goal: GoalId,
        _before: StateId,
        _action: ActionId,
        after: StateId,
        env: &E,
    ) -> Result<CriticVerdict> {
        let spec = self.goal(goal)?;
        let target = env
            .target_location(&spec.target)
            .ok_or(Error::UnknownGoal(goal.0))?;
        let reached = match spec.relation {
            Relation::Reaches => env.agent_location(after) == target,
        };
        Ok(CriticVerdict {
            reached,
            intrinsic_reward: if reached { INTRINSIC_REWARD } else { 0.0 },
        })
    }
}

pub fn goal_set<E: Environment + ?Sized>(env: &E) -> Vec<GoalSpec> {
    env.goal_targets().into_iter().map(GoalSpec::reaches).collect()
}
