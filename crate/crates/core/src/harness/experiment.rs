//! Multi-seed experiment runner.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::{AgentKind, Backend, EnvKind, ExperimentConfig};
use super::metrics::{self, EpisodeSummary, MetricRow};
use crate::agent::{save_checkpoint, AgentCheckpoint, FlatAgent, HdqnAgent, Phase};
use crate::approx::{MlpQ, QFunction, QTable};
use crate::critic::InternalCritic;
use crate::env::{ChainEnv, Environment, KeyDoorEnv, Layout};
use crate::error::{Error, Result};
use crate::rng::{streams, RngStream};

/// Everything produced by one seed.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    /// Joint-phase (or baseline training) episodes, in order.
    pub episodes: Vec<EpisodeSummary>,
    pub goal_labels: Vec<String>,
    pub pretrain_episodes: usize,
    pub checkpoint: AgentCheckpoint,
    pub elapsed: Duration,
}

impl SeedRun {
    /// Mean extrinsic reward over the last `window` episodes.
    pub fn final_mean(&self, window: usize) -> f64 {
        let tail = &self.episodes[self.episodes.len().saturating_sub(window)..];
        tail.iter().map(|e| e.reward).sum::<f64>() / tail.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<SeedRun>,
    pub rows: Vec<Vec<MetricRow>>,
    pub files: Vec<PathBuf>,
}

pub fn make_env(cfg: &ExperimentConfig) -> Result<Box<dyn Environment + Send>> {
    Ok(match cfg.env {
        EnvKind::Chain => Box::new(ChainEnv::new()),
        EnvKind::KeyDoor => {
            let layout = match &cfg.layout {
                Some(text) => Layout::parse(text)?,
                None => Layout::default(),
            };
            Box::new(KeyDoorEnv::new(layout, cfg.step_limit))
        }
    })
}

fn value_function(
    cfg: &ExperimentConfig,
    states: usize,
    goals: usize,
    outputs: usize,
    rate: f64,
    init: &mut RngStream,
) -> QFunction {
    match cfg.backend {
        Backend::Tabular => QFunction::Tabular(QTable::new(states, goals, outputs, rate)),
        Backend::Mlp => QFunction::Mlp(MlpQ::new(states, goals, &cfg.hidden, outputs, rate, init)),
    }
}

/// Train one seed to completion.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedRun> {
    let started = Instant::now();
    let mut env = make_env(cfg)?;
    let critic = InternalCritic::for_env(env.as_ref());
    let chain = cfg.env == EnvKind::Chain;
    let mut env_rng = RngStream::new(seed, streams::ENV);
    let mut episodes = Vec::with_capacity(cfg.episodes);
    let env_name = env.name().to_string();
    match cfg.agent {
        AgentKind::Hdqn => {
            let goals = critic.goal_count();
            let mut init = RngStream::new(seed, streams::INIT);
            let controller = value_function(
                cfg,
                env.state_count(),
                goals,
                env.action_count(),
                cfg.learning_rate,
                &mut init,
            );
            let meta = value_function(cfg, env.state_count(), 0, goals, cfg.meta_learning_rate, &mut init);
            let mut agent = HdqnAgent::new(controller, meta, cfg.hdqn_settings(), seed)?;
            let mut pretrain_episodes = 0;
            while agent.primitive_steps() < cfg.pretrain_steps {
                agent.run_episode(env.as_mut(), &critic, Phase::Pretrain, &mut env_rng)?;
                pretrain_episodes += 1;
            }
            for _ in 0..cfg.episodes {
                let trace = agent.run_episode(env.as_mut(), &critic, Phase::Joint, &mut env_rng)?;
                episodes.push(EpisodeSummary::from_trace(&trace, goals, chain));
            }
            Ok(SeedRun {
                seed,
                episodes,
                goal_labels: critic.goals().iter().map(|g| g.label()).collect(),
                pretrain_episodes,
                checkpoint: AgentCheckpoint::Hdqn { env: env_name, agent },
                elapsed: started.elapsed(),
            })
        }
        AgentKind::Baseline => {
            let mut agent = FlatAgent::new(
                env.state_count(),
                env.action_count(),
                cfg.learning_rate,
                cfg.gamma,
                cfg.epsilon_schedule(),
                seed,
            );
            for _ in 0..cfg.episodes {
                let trace = agent.run_episode(env.as_mut(), &mut env_rng)?;
                episodes.push(EpisodeSummary::from_trace(&trace, 0, chain));
            }
            Ok(SeedRun {
                seed,
                episodes,
                goal_labels: Vec::new(),
                pretrain_episodes: 0,
                checkpoint: AgentCheckpoint::Flat { env: env_name, agent },
                elapsed: started.elapsed(),
            })
        }
    }
}

/// Run every configured seed (in parallel) and return runs in seed order.
pub fn run_seeds(cfg: &ExperimentConfig) -> Result<Vec<SeedRun>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config {
            line: 0,
            message: format!("thread pool: {e}"),
        })?;
    pool.install(|| cfg.seeds.par_iter().map(|&s| run_seed(cfg, s)).collect())
}

/// Run an experiment and write its outputs to `out`:
/// `seed_<n>.csv`, `seed_<n>.ckpt`, `aggregate.csv` and `summary.csv`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<ExperimentReport> {
    let runs = run_seeds(cfg)?;
    fs::create_dir_all(out)?;
    let chain = cfg.env == EnvKind::Chain;
    let labels = runs.first().map(|r| r.goal_labels.clone()).unwrap_or_default();
    let mut rows = Vec::with_capacity(runs.len());
    let mut files = Vec::new();
    let mut summary = String::from("seed,episodes,final_window,final_mean_reward,pretrain_episodes\n");
    for run in &runs {
        let r = metrics::metric_rows(
            run.seed,
            &run.episodes,
            cfg.reward_window,
            cfg.visit_window,
            cfg.log_every,
        )?;
        let text = if chain {
            metrics::chain_csv(&r)
        } else {
            metrics::keydoor_csv(&r, &labels)
        };
        let csv = out.join(format!("seed_{}.csv", run.seed));
        fs::write(&csv, text)?;
        let ckpt = out.join(format!("seed_{}.ckpt", run.seed));
        save_checkpoint(&ckpt, &run.checkpoint)?;
        summary.push_str(&format!(
            "{},{},{},{},{}\n",
            run.seed,
            run.episodes.len(),
            cfg.final_window,
            run.final_mean(cfg.final_window),
            run.pretrain_episodes
        ));
        files.push(csv);
        files.push(ckpt);
        rows.push(r);
    }
    let agg = out.join("aggregate.csv");
    fs::write(&agg, metrics::aggregate_csv(&rows, &labels, chain))?;
    let sum = out.join("summary.csv");
    fs::write(&sum, summary)?;
    files.push(agg);
    files.push(sum);
    Ok(ExperimentReport { runs, rows, files })
}
