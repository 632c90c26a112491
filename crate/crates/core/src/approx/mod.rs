//! Goal-conditioned action-value estimators.
//!
//! The same contract serves both levels of the hierarchy: the controller evaluates
//! `Q(s, ·; g)` over primitive actions, the meta-controller evaluates `Q(s, ·)` over goals
//! (no goal input). Backends are an exact table and a small ReLU network with a frozen
//! target copy.

mod io;
mod mlp;
mod tabular;

pub use io::{read_q_function, write_q_function, MAGIC_PARAMS, PARAMS_VERSION};
pub use mlp::{Dense, EncodedInput, MlpGradient, MlpQ};
pub use tabular::QTable;

use crate::critic::GoalId;
use crate::env::StateId;
use crate::error::Result;
use crate::replay::{ControllerTransition, MetaTransition};

/// A training example in the common form of both time scales. `choice` is an action for the
/// controller and a goal for the meta-controller; `goal` is `None` for the meta-controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub state: StateId,
    pub goal: Option<GoalId>,
    pub choice: usize,
    pub reward: f64,
    pub next_state: StateId,
    pub terminal: bool,
}

impl From<&ControllerTransition> for Sample {
    fn from(t: &ControllerTransition) -> Self {
        Sample {
            state: t.state,
            goal: Some(t.goal),
            choice: t.action.0,
            reward: t.intrinsic_reward,
            next_state: t.next_state,
            terminal: t.terminal,
        }
    }
}

impl From<&MetaTransition> for Sample {
    fn from(t: &MetaTransition) -> Self {
        Sample {
            state: t.state,
            goal: None,
            choice: t.goal.0,
            reward: t.extrinsic_sum,
            next_state: t.next_state,
            terminal: t.terminal,
        }
    }
}

pub trait ValueFunction {
    fn state_count(&self) -> usize;

    /// Number of goals conditioning the estimate; zero for an unconditioned estimator.
    fn goal_count(&self) -> usize;

    /// Length of the vector returned by [`ValueFunction::evaluate`].
    fn output_count(&self) -> usize;

    fn evaluate(&self, state: StateId, goal: Option<GoalId>) -> Result<Vec<f64>>;

    /// One training step on `batch`; returns the mean squared TD error before the step.
    fn train(&mut self, batch: &[Sample], gamma: f64) -> Result<f64>;

    /// Copy live parameters into the frozen target. No-op for tables.
    fn sync_target(&mut self);
}

#[derive(Debug, Clone, PartialEq)]
pub enum QFunction {
    Tabular(QTable),
    Mlp(MlpQ),
}

impl QFunction {
    pub fn backend_name(&self) -> &'static str {
        match self {
            QFunction::Tabular(_) => "tabular",
            QFunction::Mlp(_) => "mlp",
        }
    }
}

impl ValueFunction for QFunction {
    fn state_count(&self) -> usize {
        match self {
            QFunction::Tabular(t) => t.state_count(),
            QFunction::Mlp(m) => m.state_count(),
        }
    }

    fn goal_count(&self) -> usize {
        match self {
            QFunction::Tabular(t) => t.goal_count(),
            QFunction::Mlp(m) => m.goal_count(),
        }
    }

    fn output_count(&self) -> usize {
        match self {
            QFunction::Tabular(t) => t.output_count(),
            QFunction::Mlp(m) => m.output_count(),
        }
    }

    fn evaluate(&self, state: StateId, goal: Option<GoalId>) -> Result<Vec<f64>> {
        match self {
            QFunction::Tabular(t) => t.evaluate(state, goal),
            QFunction::Mlp(m) => m.evaluate(state, goal),
        }
    }

    fn train(&mut self, batch: &[Sample], gamma: f64) -> Result<f64> {
        match self {
            QFunction::Tabular(t) => t.train(batch, gamma),
            QFunction::Mlp(m) => m.train(batch, gamma),
        }
    }

    fn sync_target(&mut self) {
        match self {
            QFunction::Tabular(t) => t.sync_target(),
            QFunction::Mlp(m) => m.sync_target(),
        }
    }
}

/// Index of the largest value; ties go to the lowest index. Panics on an empty slice.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn max_value(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax(&[0.1, 0.7, 0.7]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
        assert_eq!(argmax(&[-1.0, -2.0, -0.5]), 2);
    }
}
