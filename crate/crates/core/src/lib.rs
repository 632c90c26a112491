//! Hierarchical deep Q-learning with intrinsic motivation: a meta-controller picks goals,
//! a goal-conditioned controller acts, and an internal critic rewards reaching the goal.
//!
//! The crate ships two discrete tasks (a six-state stochastic chain and a key-door grid),
//! tabular and MLP value functions, the two-level agent, a flat Q-learning baseline and
//! an experiment harness.

pub mod agent;
pub mod approx;
pub mod critic;
pub mod env;
pub mod error;
pub mod harness;
pub mod replay;
pub mod rng;

pub use error::{Error, Result};
