//! Frozen-policy evaluation of a trained agent.

use super::config::ExperimentConfig;
use super::experiment::make_env;
use crate::agent::AgentCheckpoint;
use crate::critic::InternalCritic;
use crate::error::{Error, Result};
use crate::rng::{streams, RngStream};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub episodes: usize,
    pub epsilon: f64,
    pub rewards: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Half-width of the normal-approximation 95% confidence interval of the mean.
    pub ci95: f64,
    /// Distinct episode returns with their counts, ascending by return.
    pub reward_counts: Vec<(f64, usize)>,
    pub goal_labels: Vec<String>,
    pub goal_picks: Vec<usize>,
    pub goal_successes: Vec<usize>,
}

impl EvalReport {
    pub fn fraction_with_reward(&self, reward: f64) -> f64 {
        let hits = self.rewards.iter().filter(|&&r| r == reward).count();
        hits as f64 / self.episodes as f64
    }
}

impl std::fmt::Display for EvalReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "episodes: {}", self.episodes)?;
        writeln!(f, "epsilon: {}", self.epsilon)?;
        writeln!(f, "mean_reward: {} ± {} (95% CI)", self.mean, self.ci95)?;
        writeln!(f, "std_reward: {}", self.std)?;
        for (r, n) in &self.reward_counts {
            writeln!(f, "reward {r}: {} ({:.3})", n, *n as f64 / self.episodes as f64)?;
        }
        for (g, label) in self.goal_labels.iter().enumerate() {
            let picks = self.goal_picks[g];
            let rate = if picks == 0 {
                0.0
            } else {
                self.goal_successes[g] as f64 / picks as f64
            };
            writeln!(f, "goal {label}: picks {picks}, success rate {rate:.3}")?;
        }
        Ok(())
    }
}

/// Roll out `ckpt` for `episodes` episodes with exploration `epsilon` at every level.
pub fn evaluate_policy(
    ckpt: &AgentCheckpoint,
    cfg: &ExperimentConfig,
    episodes: usize,
    epsilon: f64,
    seed: u64,
) -> Result<EvalReport> {
    let mut env = make_env(cfg)?;
    if env.name() != ckpt.env_name()
        || env.state_count() != ckpt.state_count()
        || env.action_count() != ckpt.action_count()
    {
        return Err(Error::Checkpoint(format!(
            "checkpoint for {} ({} states) does not fit environment {} ({} states)",
            ckpt.env_name(),
            ckpt.state_count(),
            env.name(),
            env.state_count()
        )));
    }
    let critic = InternalCritic::for_env(env.as_ref());
    let goals = match ckpt {
        AgentCheckpoint::Hdqn { .. } => critic.goal_count(),
        AgentCheckpoint::Flat { .. } => 0,
    };
    let mut env_rng = RngStream::new(seed, streams::EVAL_ENV);
    let mut eval_rng = RngStream::new(seed, streams::EVAL);
    let mut rewards = Vec::with_capacity(episodes);
    let mut goal_picks = vec![0; goals];
    let mut goal_successes = vec![0; goals];
    let mut agent = ckpt.clone();
    for _ in 0..episodes {
        let trace = match &mut agent {
            AgentCheckpoint::Hdqn { agent, .. } => {
                agent.rollout(env.as_mut(), &critic, epsilon, &mut env_rng, &mut eval_rng)?
            }
            AgentCheckpoint::Flat { agent, .. } => {
                agent.rollout(env.as_mut(), epsilon, &mut env_rng, &mut eval_rng)?
            }
        };
        for o in &trace.options {
            goal_picks[o.goal.0] += 1;
            goal_successes[o.goal.0] += usize::from(o.reached);
        }
        rewards.push(trace.extrinsic_reward);
    }
    let n = episodes as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let std = if episodes > 1 {
        (rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = rewards.clone();
    sorted.sort_by(f64::total_cmp);
    let mut reward_counts: Vec<(f64, usize)> = Vec::new();
    for r in sorted {
        match reward_counts.last_mut() {
            Some((v, c)) if *v == r => *c += 1,
            _ => reward_counts.push((r, 1)),
        }
    }
    Ok(EvalReport {
        episodes,
        epsilon,
        mean,
        std,
        ci95: 1.96 * std / n.sqrt(),
        rewards,
        reward_counts,
        goal_labels: if goals > 0 {
            critic.goals().iter().map(|g| g.label()).collect()
        } else {
            Vec::new()
        },
        goal_picks,
        goal_successes,
    })
}
