use std::collections::VecDeque;

use crate::critic::GoalId;

pub const DEFAULT_WINDOW: usize = 100;
pub const DEFAULT_FLOOR: f64 = 0.1;

/// Sliding-window success record per goal.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalSuccessTracker {
    window: usize,
    history: Vec<VecDeque<bool>>,
}

impl GoalSuccessTracker {
    pub fn new(goals: usize, window: usize) -> Self {
        Self {
            window: window.max(1),
            history: vec![VecDeque::new(); goals],
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn goal_count(&self) -> usize {
        self.history.len()
    }

    pub fn record(&mut self, goal: GoalId, success: bool) {
        let h = &mut self.history[goal.0];
        if h.len() == self.window {
            h.pop_front();
        }
        h.push_back(success);
    }

    pub fn attempts(&self, goal: GoalId) -> usize {
        self.history[goal.0].len()
    }

    pub fn history(&self, goal: GoalId) -> impl Iterator<Item = bool> + '_ {
        self.history[goal.0].iter().copied()
    }

    /// Fraction of recorded attempts that succeeded; zero when there are none.
    pub fn success_rate(&self, goal: GoalId) -> f64 {
        let h = &self.history[goal.0];
        if h.is_empty() {
            0.0
        } else {
            h.iter().filter(|&&s| s).count() as f64 / h.len() as f64
        }
    }

    /// Controller exploration for `goal`: `max(floor, 1 − success rate)`.
    pub fn controller_epsilon(&self, goal: GoalId, floor: f64) -> f64 {
        (1.0 - self.success_rate(goal)).max(floor)
    }
}
