//! Bounded FIFO replay memories with uniform, with-replacement minibatch sampling.

use std::collections::VecDeque;

use crate::critic::GoalId;
use crate::env::{ActionId, StateId};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// One primitive step as seen by the controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerTransition {
    pub state: StateId,
    pub goal: GoalId,
    pub action: ActionId,
    pub intrinsic_reward: f64,
    pub next_state: StateId,
    /// Goal reached or episode over.
    pub terminal: bool,
}

/// One completed option as seen by the meta-controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaTransition {
    pub state: StateId,
    pub goal: GoalId,
    /// Undiscounted extrinsic reward accumulated while the option ran.
    pub extrinsic_sum: f64,
    pub next_state: StateId,
    pub terminal: bool,
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    items: VecDeque<T>,
    pushed: u64,
}

impl<T: Clone> ReplayBuffer<T> {
    /// Panics if `capacity` is zero.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
            pushed: 0,
        }
    }

    pub fn push(&mut self, item: T) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(item);
        self.pushed += 1;
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Total insertions since construction, including evicted items.
    pub fn total_pushed(&self) -> u64 {
        self.pushed
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }

    /// Draw `k` items uniformly with replacement.
    pub fn sample(&self, k: usize, rng: &mut RngStream) -> Result<Vec<T>> {
        if self.items.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        let n = self.items.len();
        Ok((0..k).map(|_| self.items[rng.index(n)].clone()).collect())
    }
}
