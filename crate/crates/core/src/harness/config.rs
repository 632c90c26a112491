//! Experiment configuration in a flat `key = value` text format.
//!
//! Grammar:
//!
//! * one `key = value` pair per line; surrounding whitespace is ignored;
//! * a line whose first non-blank character is `#` is a comment, as are blank lines;
//! * for every key except `layout`, text after a ` #` (space, hash) is an inline comment;
//! * `layout = <row>` may repeat; each occurrence appends one map row (taken verbatim,
//!   trailing whitespace trimmed), so the rows may contain `#` walls;
//! * every other key may appear at most once; unknown keys are errors.
//!
//! Keys and defaults (the defaults reproduce the chain experiment; `env = keydoor` switches
//! the environment-dependent defaults noted in brackets):
//!
//! | key | default |
//! |-----|---------|
//! | `env` | `chain` (`chain` or `keydoor`) |
//! | `agent` | `hdqn` (`hdqn` or `baseline`) |
//! | `backend` | `tabular` (`tabular` or `mlp`; baseline is always tabular) |
//! | `seeds` | `0..10` (`a..b` half-open range or comma list) |
//! | `episodes` | `50000` [keydoor: `4000`] joint-phase / training episodes |
//! | `pretrain_steps` | `0` [keydoor: `200000`] primitive steps with ε₂ = 1 |
//! | `gamma` | `0.99` controller / baseline discount |
//! | `meta_gamma` | same as `gamma`; applied once per option |
//! | `learning_rate` | `0.00025` controller / baseline step size |
//! | `meta_learning_rate` | same as `learning_rate` |
//! | `epsilon_start`, `epsilon_floor` | `1.0`, `0.1` |
//! | `epsilon_decay_steps` | `50000` (goal picks for ε₂; primitive steps for the baseline) |
//! | `controller_exploration` | `annealed` (`annealed` or `success_rate`) |
//! | `controller_epsilon_decay_steps` | `50000` primitive steps (annealed rule only) |
//! | `controller_epsilon_floor` | `0.1` |
//! | `success_window` | `100` |
//! | `minibatch` | `32` |
//! | `warmup_controller`, `warmup_meta` | `100` [keydoor: `1000`] |
//! | `replay_controller`, `replay_meta` | `100000` [keydoor: `1000000`, `50000`] |
//! | `target_sync` | `1000` training steps |
//! | `hidden` | `64` (comma list of hidden widths) |
//! | `reward_window`, `visit_window` | `1000` episodes |
//! | `final_window` | `5000` [keydoor: `400`] episodes in the summary mean |
//! | `log_every` | `100` [keydoor: `20`] episodes between CSV rows |
//! | `step_limit` | `500` (keydoor only) |
//! | `layout` | built-in 12×9 map (keydoor only) |
//! | `threads` | `0` (one per core) |
//! | `eval_episodes`, `eval_epsilon` | `200`, `0.1` |

use std::collections::BTreeMap;
use std::path::Path;

use crate::agent::ControllerExploration;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    Chain,
    KeyDoor,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Chain => "chain",
            EnvKind::KeyDoor => "keydoor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    Hdqn,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Tabular,
    Mlp,
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tabular" => Ok(Backend::Tabular),
            "mlp" => Ok(Backend::Mlp),
            other => Err(format!("unknown backend {other:?} (expected tabular or mlp)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    pub agent: AgentKind,
    pub backend: Backend,
    pub seeds: Vec<u64>,
    pub episodes: usize,
    pub pretrain_steps: u64,
    pub gamma: f64,
    pub meta_gamma: f64,
    pub learning_rate: f64,
    pub meta_learning_rate: f64,
    pub epsilon_start: f64,
    pub epsilon_floor: f64,
    pub epsilon_decay_steps: u64,
    pub controller_exploration: ControllerExploration,
    pub controller_epsilon_decay_steps: u64,
    pub controller_epsilon_floor: f64,
    pub success_window: usize,
    pub minibatch: usize,
    pub warmup_controller: usize,
    pub warmup_meta: usize,
    pub replay_controller: usize,
    pub replay_meta: usize,
    pub target_sync: u64,
    pub hidden: Vec<usize>,
    pub reward_window: usize,
    pub visit_window: usize,
    pub final_window: usize,
    pub log_every: usize,
    pub step_limit: usize,
    pub layout: Option<String>,
    pub threads: usize,
    pub eval_episodes: usize,
    pub eval_epsilon: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::defaults_for(EnvKind::Chain)
    }
}

impl ExperimentConfig {
    pub fn defaults_for(env: EnvKind) -> Self {
        let keydoor = env == EnvKind::KeyDoor;
        Self {
            env,
            agent: AgentKind::Hdqn,
            backend: Backend::Tabular,
            seeds: (0..10).collect(),
            episodes: if keydoor { 4000 } else { 50_000 },
            pretrain_steps: if keydoor { 200_000 } else { 0 },
            gamma: 0.99,
            meta_gamma: 0.99,
            learning_rate: 0.00025,
            meta_learning_rate: 0.00025,
            epsilon_start: 1.0,
            epsilon_floor: 0.1,
            epsilon_decay_steps: 50_000,
            controller_exploration: ControllerExploration::Annealed,
            controller_epsilon_decay_steps: 50_000,
            controller_epsilon_floor: 0.1,
            success_window: 100,
            minibatch: 32,
            warmup_controller: if keydoor { 1000 } else { 100 },
            warmup_meta: if keydoor { 1000 } else { 100 },
            replay_controller: if keydoor { 1_000_000 } else { 100_000 },
            replay_meta: if keydoor { 50_000 } else { 100_000 },
            target_sync: 1000,
            hidden: vec![64],
            reward_window: 1000,
            visit_window: 1000,
            final_window: if keydoor { 400 } else { 5000 },
            log_every: if keydoor { 20 } else { 100 },
            step_limit: crate::env::keydoor::DEFAULT_STEP_LIMIT,
            layout: None,
            threads: 0,
            eval_episodes: 200,
            eval_epsilon: 0.1,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut layout_rows: Vec<String> = Vec::new();
        let mut layout_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(err(line, format!("expected `key = value`, found {trimmed:?}")));
            };
            let key = key.trim();
            if key == "layout" {
                layout_rows.push(value.trim().to_string());
                if layout_line == 0 {
                    layout_line = line;
                }
                continue;
            }
            let value = match value.find(" #") {
                Some(pos) => &value[..pos],
                None => value,
            }
            .trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(err(line, format!("unknown key {key:?}")));
            }
            if entries.insert(key.to_string(), (line, value.to_string())).is_some() {
                return Err(err(line, format!("duplicate key {key:?}")));
            }
        }

        let env = match entries.get("env") {
            None => EnvKind::Chain,
            Some((line, v)) => match v.as_str() {
                "chain" => EnvKind::Chain,
                "keydoor" => EnvKind::KeyDoor,
                other => return Err(err(*line, format!("unknown env {other:?} (expected chain or keydoor)"))),
            },
        };
        let mut cfg = Self::defaults_for(env);
        let mut meta_rate_set = false;
        let mut meta_gamma_set = false;
        for (key, (line, value)) in &entries {
            let line = *line;
            match key.as_str() {
                "env" => {}
                "agent" => {
                    cfg.agent = match value.as_str() {
                        "hdqn" => AgentKind::Hdqn,
                        "baseline" => AgentKind::Baseline,
                        other => return Err(err(line, format!("unknown agent {other:?} (expected hdqn or baseline)"))),
                    }
                }
                "backend" => cfg.backend = value.parse().map_err(|m| err(line, m))?,
                "seeds" => cfg.seeds = parse_seeds(value).map_err(|m| err(line, m))?,
                "episodes" => cfg.episodes = num(line, key, value)?,
                "pretrain_steps" => cfg.pretrain_steps = num(line, key, value)?,
                "gamma" => cfg.gamma = num(line, key, value)?,
                "meta_gamma" => {
                    cfg.meta_gamma = num(line, key, value)?;
                    meta_gamma_set = true;
                }
                "learning_rate" => cfg.learning_rate = num(line, key, value)?,
                "meta_learning_rate" => {
                    cfg.meta_learning_rate = num(line, key, value)?;
                    meta_rate_set = true;
                }
                "epsilon_start" => cfg.epsilon_start = num(line, key, value)?,
                "epsilon_floor" => cfg.epsilon_floor = num(line, key, value)?,
                "epsilon_decay_steps" => cfg.epsilon_decay_steps = num(line, key, value)?,
                "controller_exploration" => {
                    cfg.controller_exploration = match value.as_str() {
                        "annealed" => ControllerExploration::Annealed,
                        "success_rate" => ControllerExploration::SuccessRate,
                        other => {
                            return Err(err(
                                line,
                                format!("unknown controller_exploration {other:?} (expected annealed or success_rate)"),
                            ))
                        }
                    }
                }
                "controller_epsilon_decay_steps" => cfg.controller_epsilon_decay_steps = num(line, key, value)?,
                "controller_epsilon_floor" => cfg.controller_epsilon_floor = num(line, key, value)?,
                "success_window" => cfg.success_window = num(line, key, value)?,
                "minibatch" => cfg.minibatch = num(line, key, value)?,
                "warmup_controller" => cfg.warmup_controller = num(line, key, value)?,
                "warmup_meta" => cfg.warmup_meta = num(line, key, value)?,
                "replay_controller" => cfg.replay_controller = num(line, key, value)?,
                "replay_meta" => cfg.replay_meta = num(line, key, value)?,
                "target_sync" => cfg.target_sync = num(line, key, value)?,
                "hidden" => {
                    cfg.hidden = value
                        .split(',')
                        .map(|w| w.trim())
                        .filter(|w| !w.is_empty())
                        .map(|w| num(line, key, w))
                        .collect::<Result<Vec<usize>>>()?
                }
                "reward_window" => cfg.reward_window = num(line, key, value)?,
                "visit_window" => cfg.visit_window = num(line, key, value)?,
                "final_window" => cfg.final_window = num(line, key, value)?,
                "log_every" => cfg.log_every = num(line, key, value)?,
                "step_limit" => cfg.step_limit = num(line, key, value)?,
                "threads" => cfg.threads = num(line, key, value)?,
                "eval_episodes" => cfg.eval_episodes = num(line, key, value)?,
                "eval_epsilon" => cfg.eval_epsilon = num(line, key, value)?,
                _ => unreachable!("key checked against KNOWN_KEYS"),
            }
        }
        if !meta_gamma_set {
            cfg.meta_gamma = cfg.gamma;
        }
        if !meta_rate_set {
            cfg.meta_learning_rate = cfg.learning_rate;
        }
        if !layout_rows.is_empty() {
            cfg.layout = Some(layout_rows.join("\n"));
        }
        let line_of = |k: &str| entries.get(k).map_or(0, |(l, _)| *l);
        cfg.validate_with(|k| if k == "layout" { layout_line } else { line_of(k) })?;
        Ok(cfg)
    }

    /// Check cross-field constraints. Diagnostics carry line 0 when the offending value
    /// came from a default or the command line.
    pub fn validate(&self) -> Result<()> {
        self.validate_with(|_| 0)
    }

    fn validate_with(&self, line_of: impl Fn(&str) -> usize) -> Result<()> {
        let fail = |key: &str, msg: String| Err(err(line_of(key), msg));
        if self.seeds.is_empty() {
            return fail("seeds", "at least one seed is required".into());
        }
        if self.episodes == 0 {
            return fail("episodes", "episodes must be positive".into());
        }
        for (key, v) in [("gamma", self.gamma), ("meta_gamma", self.meta_gamma)] {
            if !(0.0..=1.0).contains(&v) {
                return fail(key, format!("{key} {v} outside [0, 1]"));
            }
        }
        for (key, v) in [
            ("learning_rate", self.learning_rate),
            ("meta_learning_rate", self.meta_learning_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(key, format!("{key} must be positive"));
            }
        }
        for (key, v) in [
            ("epsilon_start", self.epsilon_start),
            ("epsilon_floor", self.epsilon_floor),
            ("controller_epsilon_floor", self.controller_epsilon_floor),
            ("eval_epsilon", self.eval_epsilon),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(key, format!("{key} {v} outside [0, 1]"));
            }
        }
        if self.epsilon_floor > self.epsilon_start {
            return fail("epsilon_floor", "epsilon_floor exceeds epsilon_start".into());
        }
        for (key, v) in [
            ("minibatch", self.minibatch),
            ("replay_controller", self.replay_controller),
            ("replay_meta", self.replay_meta),
            ("success_window", self.success_window),
            ("reward_window", self.reward_window),
            ("visit_window", self.visit_window),
            ("final_window", self.final_window),
            ("log_every", self.log_every),
            ("step_limit", self.step_limit),
        ] {
            if v == 0 {
                return fail(key, format!("{key} must be positive"));
            }
        }
        if self.agent == AgentKind::Baseline && self.backend == Backend::Mlp {
            return fail("backend", "the baseline agent is tabular only".into());
        }
        if self.backend == Backend::Mlp && self.hidden.is_empty() {
            return fail("hidden", "mlp backend needs at least one hidden layer".into());
        }
        if let Some(layout) = &self.layout {
            if self.env != EnvKind::KeyDoor {
                return fail("layout", "layout only applies to env = keydoor".into());
            }
            crate::env::Layout::parse(layout).map_err(|e| err(line_of("layout"), e.to_string()))?;
        }
        Ok(())
    }

    pub fn epsilon_schedule(&self) -> crate::agent::EpsilonSchedule {
        crate::agent::EpsilonSchedule::new(self.epsilon_start, self.epsilon_floor, self.epsilon_decay_steps)
    }

    pub fn hdqn_settings(&self) -> crate::agent::HdqnSettings {
        crate::agent::HdqnSettings {
            gamma: self.gamma,
            meta_gamma: self.meta_gamma,
            minibatch: self.minibatch,
            warmup_controller: self.warmup_controller,
            warmup_meta: self.warmup_meta,
            replay_controller: self.replay_controller,
            replay_meta: self.replay_meta,
            target_sync: self.target_sync,
            meta_epsilon: self.epsilon_schedule(),
            controller_exploration: self.controller_exploration,
            controller_epsilon: crate::agent::EpsilonSchedule::new(
                self.epsilon_start,
                self.controller_epsilon_floor,
                self.controller_epsilon_decay_steps,
            ),
            controller_epsilon_floor: self.controller_epsilon_floor,
            success_window: self.success_window,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "env",
    "agent",
    "backend",
    "seeds",
    "episodes",
    "pretrain_steps",
    "gamma",
    "meta_gamma",
    "learning_rate",
    "meta_learning_rate",
    "epsilon_start",
    "epsilon_floor",
    "epsilon_decay_steps",
    "controller_exploration",
    "controller_epsilon_decay_steps",
    "controller_epsilon_floor",
    "success_window",
    "minibatch",
    "warmup_controller",
    "warmup_meta",
    "replay_controller",
    "replay_meta",
    "target_sync",
    "hidden",
    "reward_window",
    "visit_window",
    "final_window",
    "log_every",
    "step_limit",
    "threads",
    "eval_episodes",
    "eval_epsilon",
];

fn err(line: usize, message: String) -> Error {
    Error::Config { line, message }
}

fn num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| err(line, format!("invalid value {value:?} for {key}")))
}

fn parse_seeds(value: &str) -> std::result::Result<Vec<u64>, String> {
    if let Some((a, b)) = value.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("invalid seed range {value:?}"))?;
        let b: u64 = b.trim().parse().map_err(|_| format!("invalid seed range {value:?}"))?;
        return Ok((a..b).collect());
    }
    value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("invalid seed {s:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_chain_experiment() {
        let cfg = ExperimentConfig::parse("# nothing here\n\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.env, EnvKind::Chain);
        assert_eq!(cfg.seeds.len(), 10);
        assert_eq!(cfg.episodes, 50_000);
        assert_eq!(cfg.learning_rate, 0.00025);
        assert_eq!(cfg.epsilon_decay_steps, 50_000);
    }

    #[test]
    fn keydoor_defaults_switch() {
        let cfg = ExperimentConfig::parse("env = keydoor").unwrap();
        assert_eq!(cfg.replay_controller, 1_000_000);
        assert_eq!(cfg.replay_meta, 50_000);
        assert_eq!(cfg.warmup_meta, 1000);
        assert_eq!(cfg.pretrain_steps, 200_000);
    }

    #[test]
    fn meta_gamma_follows_gamma_unless_set() {
        let cfg = ExperimentConfig::parse("gamma = 0.9").unwrap();
        assert_eq!(cfg.meta_gamma, 0.9);
        let cfg = ExperimentConfig::parse("gamma = 0.9\nmeta_gamma = 0.5").unwrap();
        assert_eq!((cfg.gamma, cfg.meta_gamma), (0.9, 0.5));
        assert_eq!(cfg.hdqn_settings().meta_gamma, 0.5);
        assert!(ExperimentConfig::parse("meta_gamma = 1.5").is_err());
    }

    #[test]
    fn parses_values_and_comments() {
        let cfg = ExperimentConfig::parse(
            "agent = baseline   # flat learner\nseeds = 3, 5,7\nlearning_rate = 0.1\nhidden = 32, 16\n",
        )
        .unwrap();
        assert_eq!(cfg.agent, AgentKind::Baseline);
        assert_eq!(cfg.seeds, vec![3, 5, 7]);
        assert_eq!(cfg.meta_learning_rate, 0.1);
        assert_eq!(cfg.hidden, vec![32, 16]);
        assert_eq!(ExperimentConfig::parse("seeds = 2..5").unwrap().seeds, vec![2, 3, 4]);
    }

    #[test]
    fn layout_rows_keep_walls() {
        let cfg = ExperimentConfig::parse(
            "env = keydoor\nlayout = #######\nlayout = #AKD..#\nlayout = #L...L#\nlayout = #..SS.#\nlayout = #######\n",
        )
        .unwrap();
        assert_eq!(cfg.layout.as_deref().unwrap().lines().count(), 5);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let cases = [
            ("episodes = 10\nbogus = 1\n", 2),
            ("\n\nepisodes = ten\n", 3),
            ("gamma = 0.9\ngamma = 0.8\n", 2),
            ("no equals sign here\n", 1),
            ("agent = baseline\nbackend = mlp\n", 2),
            ("seeds = \n", 1),
            ("epsilon_floor = 1.5\n", 1),
            ("env = keydoor\nlayout = ###\n", 2),
            ("env = chain\nlayout = ###\n", 2),
        ];
        for (text, want) in cases {
            match ExperimentConfig::parse(text) {
                Err(Error::Config { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }
}
