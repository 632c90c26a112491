//! Python bindings for the `hdqn` crate.
//!
//! Exposes the two environments, the exact chain solver, experiment configs, training
//! runs and frozen-policy evaluation. Config and layout problems raise `ValueError`;
//! everything else raises `RuntimeError`.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hdqn::env::{ActionId, Environment, Layout};
use hdqn::harness::{self, AgentKind, Backend, EnvKind};
use hdqn::rng::{streams, RngStream};

fn py_err(e: hdqn::Error) -> PyErr {
    match e {
        hdqn::Error::Config { .. } | hdqn::Error::Layout(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

type StepTuple = (usize, f64, bool);

#[pyclass(name = "ChainEnv")]
struct PyChainEnv {
    env: hdqn::env::ChainEnv,
    rng: RngStream,
}

#[pymethods]
impl PyChainEnv {
    #[new]
    #[pyo3(signature = (seed = 0))]
    fn new(seed: u64) -> Self {
        Self {
            env: hdqn::env::ChainEnv::new(),
            rng: RngStream::new(seed, streams::ENV),
        }
    }

    fn reset(&mut self) -> usize {
        self.env.reset(&mut self.rng).0
    }

    /// Returns `(state, reward, terminal)`. Action 0 is left, 1 is right.
    fn step(&mut self, action: usize) -> PyResult<StepTuple> {
        let out = self.env.step(ActionId(action), &mut self.rng).map_err(py_err)?;
        Ok((out.next_state.0, out.extrinsic_reward, out.terminal))
    }

    #[getter]
    fn position(&self) -> usize {
        self.env.chain_state().position
    }

    #[getter]
    fn visited_end(&self) -> bool {
        self.env.chain_state().visited_end
    }

    #[getter]
    fn state_count(&self) -> usize {
        self.env.state_count()
    }

    #[getter]
    fn action_count(&self) -> usize {
        self.env.action_count()
    }

    #[getter]
    fn terminal(&self) -> bool {
        self.env.is_terminal()
    }
}

#[pyclass(name = "KeyDoorEnv")]
struct PyKeyDoorEnv {
    env: hdqn::env::KeyDoorEnv,
    rng: RngStream,
}

#[pymethods]
impl PyKeyDoorEnv {
    /// `layout` is an ASCII map; the built-in map is used when omitted.
    #[new]
    #[pyo3(signature = (layout = None, step_limit = 500))]
    fn new(layout: Option<&str>, step_limit: usize) -> PyResult<Self> {
        let layout = match layout {
            Some(text) => Layout::parse(text).map_err(py_err)?,
            None => Layout::default(),
        };
        Ok(Self {
            env: hdqn::env::KeyDoorEnv::new(layout, step_limit),
            rng: RngStream::new(0, streams::ENV),
        })
    }

    fn reset(&mut self) -> usize {
        self.env.reset(&mut self.rng).0
    }

    /// Returns `(state, reward, terminal)`. Actions: 0 up, 1 down, 2 left, 3 right.
    fn step(&mut self, action: usize) -> PyResult<StepTuple> {
        let out = self.env.step(ActionId(action), &mut self.rng).map_err(py_err)?;
        Ok((out.next_state.0, out.extrinsic_reward, out.terminal))
    }

    /// `(kind, (x, y), alive)` for every entity.
    fn entities(&self) -> Vec<(String, (usize, usize), bool)> {
        self.env
            .entities()
            .into_iter()
            .map(|e| (e.kind.name().to_string(), e.position, e.alive))
            .collect()
    }

    #[getter]
    fn agent(&self) -> (usize, usize) {
        self.env.grid_state().agent
    }

    #[getter]
    fn has_key(&self) -> bool {
        self.env.grid_state().has_key
    }

    #[getter]
    fn steps_elapsed(&self) -> usize {
        self.env.grid_state().steps_elapsed
    }

    #[getter]
    fn state_count(&self) -> usize {
        self.env.state_count()
    }

    #[getter]
    fn action_count(&self) -> usize {
        self.env.action_count()
    }

    #[getter]
    fn terminal(&self) -> bool {
        self.env.is_terminal()
    }
}

#[pyclass(name = "ChainSolution", get_all)]
struct PyChainSolution {
    gamma: f64,
    values: Vec<f64>,
    q: Vec<[f64; 2]>,
    /// 0 = left, 1 = right, per augmented state.
    policy: Vec<usize>,
    start_value: f64,
    iterations: usize,
    residual: f64,
}

/// Exact values of the fully observed chain (12 states: position × visited).
#[pyfunction]
#[pyo3(signature = (gamma = 1.0))]
fn solve_chain(gamma: f64) -> PyChainSolution {
    let sol = harness::solve_chain(gamma);
    PyChainSolution {
        gamma,
        start_value: sol.start_value(),
        policy: sol.policy.iter().map(|a| a.0).collect(),
        values: sol.values,
        q: sol.q,
        iterations: sol.iterations,
        residual: sol.residual,
    }
}

#[pyclass(name = "Config")]
struct PyConfig {
    cfg: harness::ExperimentConfig,
}

#[pymethods]
impl PyConfig {
    /// Parse config text (`key = value` lines). An empty string gives the chain defaults.
    #[new]
    #[pyo3(signature = (text = ""))]
    fn new(text: &str) -> PyResult<Self> {
        harness::ExperimentConfig::parse(text)
            .map(|cfg| Self { cfg })
            .map_err(py_err)
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        harness::ExperimentConfig::from_file(&path)
            .map(|cfg| Self { cfg })
            .map_err(py_err)
    }

    #[getter]
    fn env(&self) -> &'static str {
        self.cfg.env.name()
    }

    #[getter]
    fn agent(&self) -> &'static str {
        match self.cfg.agent {
            AgentKind::Hdqn => "hdqn",
            AgentKind::Baseline => "baseline",
        }
    }

    #[getter]
    fn backend(&self) -> &'static str {
        match self.cfg.backend {
            Backend::Tabular => "tabular",
            Backend::Mlp => "mlp",
        }
    }

    #[getter]
    fn get_seeds(&self) -> Vec<u64> {
        self.cfg.seeds.clone()
    }

    #[setter]
    fn set_seeds(&mut self, seeds: Vec<u64>) -> PyResult<()> {
        let old = std::mem::replace(&mut self.cfg.seeds, seeds);
        self.revalidate(|c| c.seeds = old)
    }

    #[getter]
    fn get_episodes(&self) -> usize {
        self.cfg.episodes
    }

    #[setter]
    fn set_episodes(&mut self, episodes: usize) -> PyResult<()> {
        let old = std::mem::replace(&mut self.cfg.episodes, episodes);
        self.revalidate(|c| c.episodes = old)
    }

    #[getter]
    fn get_pretrain_steps(&self) -> u64 {
        self.cfg.pretrain_steps
    }

    #[setter]
    fn set_pretrain_steps(&mut self, steps: u64) {
        self.cfg.pretrain_steps = steps;
    }

    #[getter]
    fn final_window(&self) -> usize {
        self.cfg.final_window
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(env={}, agent={}, backend={}, seeds={:?}, episodes={})",
            self.env(),
            self.agent(),
            self.backend(),
            self.cfg.seeds,
            self.cfg.episodes
        )
    }
}

impl PyConfig {
    fn revalidate(&mut self, undo: impl FnOnce(&mut harness::ExperimentConfig)) -> PyResult<()> {
        if let Err(e) = self.cfg.validate() {
            undo(&mut self.cfg);
            return Err(py_err(e));
        }
        Ok(())
    }
}

#[pyclass(name = "SeedRun")]
struct PySeedRun {
    run: harness::SeedRun,
    cfg: harness::ExperimentConfig,
}

#[pymethods]
impl PySeedRun {
    #[getter]
    fn seed(&self) -> u64 {
        self.run.seed
    }

    /// Extrinsic return of every joint-phase (or baseline) episode.
    #[getter]
    fn rewards(&self) -> Vec<f64> {
        self.run.episodes.iter().map(|e| e.reward).collect()
    }

    #[getter]
    fn goal_labels(&self) -> Vec<String> {
        self.run.goal_labels.clone()
    }

    /// Per-episode goal pick counts, one list per episode.
    #[getter]
    fn goal_picks(&self) -> Vec<Vec<u32>> {
        self.run.episodes.iter().map(|e| e.picks.clone()).collect()
    }

    #[getter]
    fn pretrain_episodes(&self) -> usize {
        self.run.pretrain_episodes
    }

    #[getter]
    fn elapsed_seconds(&self) -> f64 {
        self.run.elapsed.as_secs_f64()
    }

    /// Mean reward over the last `window` episodes (the config's final window by default).
    #[pyo3(signature = (window = None))]
    fn final_mean(&self, window: Option<usize>) -> f64 {
        self.run.final_mean(window.unwrap_or(self.cfg.final_window))
    }

    /// Roll out the trained policy with fixed exploration. Returns a dict with
    /// `mean`, `std`, `ci95`, `rewards` and per-goal `picks` / `successes`.
    #[pyo3(signature = (episodes = None, epsilon = None, seed = None))]
    fn evaluate<'py>(
        &self,
        py: Python<'py>,
        episodes: Option<usize>,
        epsilon: Option<f64>,
        seed: Option<u64>,
    ) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let report = harness::evaluate_policy(
            &self.run.checkpoint,
            &self.cfg,
            episodes.unwrap_or(self.cfg.eval_episodes),
            epsilon.unwrap_or(self.cfg.eval_epsilon),
            seed.unwrap_or(self.run.seed),
        )
        .map_err(py_err)?;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("episodes", report.episodes)?;
        d.set_item("epsilon", report.epsilon)?;
        d.set_item("mean", report.mean)?;
        d.set_item("std", report.std)?;
        d.set_item("ci95", report.ci95)?;
        d.set_item("rewards", report.rewards)?;
        d.set_item("goal_labels", report.goal_labels)?;
        d.set_item("picks", report.goal_picks)?;
        d.set_item("successes", report.goal_successes)?;
        Ok(d)
    }
}

/// Train one seed under `config` and return the run.
#[pyfunction]
fn run_seed(py: Python<'_>, config: &PyConfig, seed: u64) -> PyResult<PySeedRun> {
    let cfg = config.cfg.clone();
    let run = py.detach(|| harness::run_seed(&cfg, seed)).map_err(py_err)?;
    Ok(PySeedRun { run, cfg })
}

/// Train every configured seed, write CSVs and checkpoints to `out_dir`, and return the
/// runs together with the written paths.
#[pyfunction]
fn run_experiment(py: Python<'_>, config: &PyConfig, out_dir: PathBuf) -> PyResult<(Vec<PySeedRun>, Vec<PathBuf>)> {
    let cfg = config.cfg.clone();
    let report = py.detach(|| harness::run_experiment(&cfg, &out_dir)).map_err(py_err)?;
    let runs = report
        .runs
        .into_iter()
        .map(|run| PySeedRun { run, cfg: cfg.clone() })
        .collect();
    Ok((runs, report.files))
}

/// Names of the supported environments.
#[pyfunction]
fn environments() -> Vec<&'static str> {
    vec![EnvKind::Chain.name(), EnvKind::KeyDoor.name()]
}

#[pymodule]
fn hdqn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChainEnv>()?;
    m.add_class::<PyKeyDoorEnv>()?;
    m.add_class::<PyChainSolution>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PySeedRun>()?;
    m.add_function(wrap_pyfunction!(solve_chain, m)?)?;
    m.add_function(wrap_pyfunction!(run_seed, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(environments, m)?)?;
    Ok(())
}
