use super::{max_value, Sample, ValueFunction};
use crate::critic::GoalId;
use crate::env::StateId;
use crate::error::{check_index, Error, Result};

/// Dense table of action values indexed by `(state, goal, output)`.
///
/// An unconditioned table (`goals == 0`) stores a single goal slot and must be queried
/// with `goal = None`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    states: usize,
    goals: usize,
    outputs: usize,
    alpha: f64,
    values: Vec<f64>,
    updates: u64,
}

impl QTable {
    /// Zero-initialized table.
    pub fn new(states: usize, goals: usize, outputs: usize, alpha: f64) -> Self {
        let slots = goals.max(1);
        Self {
            states,
            goals,
            outputs,
            alpha,
            values: vec![0.0; states * slots * outputs],
            updates: 0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn from_parts(
        states: usize,
        goals: usize,
        outputs: usize,
        alpha: f64,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(values.len(), states * goals.max(1) * outputs);
        Self {
            states,
            goals,
            outputs,
            alpha,
            values,
            updates: 0,
        }
    }

    fn row(&self, state: StateId, goal: Option<GoalId>) -> Result<usize> {
        check_index("state", state.0, self.states)?;
        let g = match (goal, self.goals) {
            (None, 0) => 0,
            (Some(g), n) if n > 0 => {
                check_index("goal", g.0, n)?;
                g.0
            }
            (Some(g), _) => return Err(Error::UnknownGoal(g.0)),
            (None, n) => {
                return Err(Error::OutOfRange {
                    what: "goal (missing)",
                    index: 0,
                    size: n,
                })
            }
        };
        Ok((state.0 * self.goals.max(1) + g) * self.outputs)
    }

    pub fn get(&self, state: StateId, goal: Option<GoalId>, choice: usize) -> Result<f64> {
        check_index("choice", choice, self.outputs)?;
        Ok(self.values[self.row(state, goal)? + choice])
    }

    pub fn set(&mut self, state: StateId, goal: Option<GoalId>, choice: usize, v: f64) -> Result<()> {
        check_index("choice", choice, self.outputs)?;
        let i = self.row(state, goal)? + choice;
        self.values[i] = v;
        Ok(())
    }

    /// One Q-learning backup at the table's own rate. Returns the TD error before the update.
    pub fn backup(&mut self, sample: &Sample, gamma: f64) -> Result<f64> {
        self.backup_with_rate(sample, gamma, self.alpha)
    }

    /// `Q ← Q + rate·(r + γ·max Q(s′)·(1 − terminal) − Q)`.
    pub fn backup_with_rate(&mut self, sample: &Sample, gamma: f64, rate: f64) -> Result<f64> {
        check_index("choice", sample.choice, self.outputs)?;
        let i = self.row(sample.state, sample.goal)? + sample.choice;
        let bootstrap = if sample.terminal {
            0.0
        } else {
            let j = self.row(sample.next_state, sample.goal)?;
            max_value(&self.values[j..j + self.outputs])
        };
        let td = sample.reward + gamma * bootstrap - self.values[i];
        self.values[i] += rate * td;
        self.updates += 1;
        if !self.values[i].is_finite() {
            return Err(Error::Divergence {
                loss: self.values[i],
                step: self.updates,
            });
        }
        Ok(td)
    }
}

impl ValueFunction for QTable {
    fn state_count(&self) -> usize {
        self.states
    }

    fn goal_count(&self) -> usize {
        self.goals
    }

    fn output_count(&self) -> usize {
        self.outputs
    }

    fn evaluate(&self, state: StateId, goal: Option<GoalId>) -> Result<Vec<f64>> {
        let i = self.row(state, goal)?;
        Ok(self.values[i..i + self.outputs].to_vec())
    }

    /// Applies one backup per sample, in batch order.
    fn train(&mut self, batch: &[Sample], gamma: f64) -> Result<f64> {
        let mut sq = 0.0;
        for s in batch {
            let td = self.backup(s, gamma)?;
            sq += td * td;
        }
        Ok(if batch.is_empty() {
            0.0
        } else {
            sq / batch.len() as f64
        })
    }

    fn sync_target(&mut self) {}
}
