//! Experiment configuration, multi-seed runs, metrics output, evaluation and the chain oracle.

pub mod config;
pub mod eval;
pub mod experiment;
pub mod metrics;
pub mod oracle;

pub use config::{AgentKind, Backend, EnvKind, ExperimentConfig};
pub use eval::{evaluate_policy, EvalReport};
pub use experiment::{make_env, run_experiment, run_seed, run_seeds, ExperimentReport, SeedRun};
pub use metrics::{EpisodeSummary, MetricRow};
pub use oracle::{sampled_q_learning, solve_chain, ChainSolution};
