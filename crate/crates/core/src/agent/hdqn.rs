//! Two-level agent: a meta-controller choosing goals from states at the slow time scale and
//! a controller choosing primitive actions for the current goal at the fast time scale.

use super::tracker;
use super::{eps_greedy, EpisodeTrace, EpsilonSchedule, GoalSuccessTracker, OptionRecord};
use crate::approx::{QFunction, Sample, ValueFunction};
use crate::critic::{GoalId, InternalCritic};
use crate::env::{ActionId, Environment, StateId};
use crate::error::{Error, Result};
use crate::replay::{ControllerTransition, MetaTransition, ReplayBuffer};
use crate::rng::{streams, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Meta-controller explores uniformly (ε₂ = 1); its schedule does not advance.
    Pretrain,
    /// Both levels learn; ε₂ anneals per goal pick.
    Joint,
}

/// How the controller's per-goal exploration rate is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerExploration {
    /// `max(floor, 1 − success rate of g)`.
    SuccessRate,
    /// `max(floor, min(schedule(primitive steps), 1 − success rate of g))`.
    Annealed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HdqnSettings {
    /// Controller discount.
    pub gamma: f64,
    /// Meta-controller discount, applied once per option.
    pub meta_gamma: f64,
    pub minibatch: usize,
    pub warmup_controller: usize,
    pub warmup_meta: usize,
    pub replay_controller: usize,
    pub replay_meta: usize,
    /// Training steps between target syncs (network backends only).
    pub target_sync: u64,
    pub meta_epsilon: EpsilonSchedule,
    pub controller_exploration: ControllerExploration,
    /// Clocked by primitive steps; used by [`ControllerExploration::Annealed`].
    pub controller_epsilon: EpsilonSchedule,
    pub controller_epsilon_floor: f64,
    pub success_window: usize,
}

impl Default for HdqnSettings {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            meta_gamma: 0.99,
            minibatch: 32,
            warmup_controller: 100,
            warmup_meta: 100,
            replay_controller: 100_000,
            replay_meta: 100_000,
            target_sync: 1000,
            meta_epsilon: EpsilonSchedule::default(),
            controller_exploration: ControllerExploration::Annealed,
            controller_epsilon: EpsilonSchedule::default(),
            controller_epsilon_floor: tracker::DEFAULT_FLOOR,
            success_window: tracker::DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateSettings {
    pub minibatch: usize,
    pub warmup: usize,
    pub gamma: f64,
}

/// Sample a minibatch and take one training step, unless the buffer is still warming up
/// (fewer than `max(minibatch, warmup)` items), in which case nothing changes.
pub fn update_params<T>(
    q: &mut QFunction,
    buffer: &ReplayBuffer<T>,
    settings: &UpdateSettings,
    rng: &mut RngStream,
) -> Result<Option<f64>>
where
    T: Clone,
    for<'a> Sample: From<&'a T>,
{
    if buffer.len() < settings.minibatch.max(settings.warmup).max(1) {
        return Ok(None);
    }
    let batch: Vec<Sample> = buffer
        .sample(settings.minibatch, rng)?
        .iter()
        .map(Sample::from)
        .collect();
    q.train(&batch, settings.gamma).map(Some)
}

#[derive(Debug, Clone)]
pub struct HdqnAgent {
    controller: QFunction,
    meta: QFunction,
    d1: ReplayBuffer<ControllerTransition>,
    d2: ReplayBuffer<MetaTransition>,
    tracker: GoalSuccessTracker,
    settings: HdqnSettings,
    goals: usize,
    actions: usize,
    meta_steps: u64,
    primitive_steps: u64,
    controller_updates: u64,
    meta_updates: u64,
    controller_rng: RngStream,
    meta_rng: RngStream,
    replay1_rng: RngStream,
    replay2_rng: RngStream,
}

enum Mode {
    Train(Phase),
    Eval { epsilon: f64 },
}

impl HdqnAgent {
    /// `controller` must be conditioned on `goals` goals with one output per action;
    /// `meta` must be unconditioned with one output per goal.
    pub fn new(
        controller: QFunction,
        meta: QFunction,
        settings: HdqnSettings,
        seed: u64,
    ) -> Result<Self> {
        let goals = meta.output_count();
        let actions = controller.output_count();
        if controller.goal_count() != goals {
            return Err(Error::OutOfRange {
                what: "controller goal count",
                index: controller.goal_count(),
                size: goals,
            });
        }
        if meta.goal_count() != 0 || meta.state_count() != controller.state_count() {
            return Err(Error::OutOfRange {
                what: "meta-controller shape",
                index: meta.state_count(),
                size: controller.state_count(),
            });
        }
        Ok(Self {
            controller,
            meta,
            d1: ReplayBuffer::new(settings.replay_controller),
            d2: ReplayBuffer::new(settings.replay_meta),
            tracker: GoalSuccessTracker::new(goals, settings.success_window),
            settings,
            goals,
            actions,
            meta_steps: 0,
            primitive_steps: 0,
            controller_updates: 0,
            meta_updates: 0,
            controller_rng: RngStream::new(seed, streams::CONTROLLER),
            meta_rng: RngStream::new(seed, streams::META),
            replay1_rng: RngStream::new(seed, streams::REPLAY_CONTROLLER),
            replay2_rng: RngStream::new(seed, streams::REPLAY_META),
        })
    }

    pub fn controller(&self) -> &QFunction {
        &self.controller
    }

    pub fn meta(&self) -> &QFunction {
        &self.meta
    }

    pub fn controller_memory(&self) -> &ReplayBuffer<ControllerTransition> {
        &self.d1
    }

    pub fn meta_memory(&self) -> &ReplayBuffer<MetaTransition> {
        &self.d2
    }

    pub fn tracker(&self) -> &GoalSuccessTracker {
        &self.tracker
    }

    pub fn settings(&self) -> &HdqnSettings {
        &self.settings
    }

    pub fn goal_count(&self) -> usize {
        self.goals
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    pub fn meta_steps(&self) -> u64 {
        self.meta_steps
    }

    pub fn primitive_steps(&self) -> u64 {
        self.primitive_steps
    }

    /// Current meta-controller exploration rate in the joint phase.
    pub fn meta_epsilon(&self) -> f64 {
        self.settings.meta_epsilon.value(self.meta_steps)
    }

    pub fn controller_epsilon(&self, goal: GoalId) -> f64 {
        let floor = self.settings.controller_epsilon_floor;
        let adaptive = self.tracker.controller_epsilon(goal, floor);
        match self.settings.controller_exploration {
            ControllerExploration::SuccessRate => adaptive,
            ControllerExploration::Annealed => adaptive
                .min(self.settings.controller_epsilon.value(self.primitive_steps))
                .max(floor),
        }
    }

    pub(crate) fn restore(
        &mut self,
        tracker: GoalSuccessTracker,
        meta_steps: u64,
        primitive_steps: u64,
    ) {
        self.tracker = tracker;
        self.meta_steps = meta_steps;
        self.primitive_steps = primitive_steps;
    }

    /// Run one training episode.
    pub fn run_episode<E: Environment + ?Sized>(
        &mut self,
        env: &mut E,
        critic: &InternalCritic,
        phase: Phase,
        env_rng: &mut RngStream,
    ) -> Result<EpisodeTrace> {
        self.play(env, critic, Mode::Train(phase), env_rng, None)
    }

    /// Roll out the frozen policy with exploration `epsilon` at both levels. Nothing is
    /// stored or learned; `eval_rng` drives all exploration.
    pub fn rollout<E: Environment + ?Sized>(
        &mut self,
        env: &mut E,
        critic: &InternalCritic,
        epsilon: f64,
        env_rng: &mut RngStream,
        eval_rng: &mut RngStream,
    ) -> Result<EpisodeTrace> {
        self.play(env, critic, Mode::Eval { epsilon }, env_rng, Some(eval_rng))
    }

    fn pick_goal(&mut self, state: StateId, mode: &Mode, eval_rng: Option<&mut RngStream>) -> Result<GoalId> {
        let values = self.meta.evaluate(state, None)?;
        let candidates: Vec<usize> = (0..self.goals).collect();
        let g = match *mode {
            Mode::Train(Phase::Pretrain) => {
                eps_greedy(&values, &candidates, 1.0, &mut self.meta_rng)
            }
            Mode::Train(Phase::Joint) => {
                let eps = self.meta_epsilon();
                self.meta_steps += 1;
                eps_greedy(&values, &candidates, eps, &mut self.meta_rng)
            }
            Mode::Eval { epsilon } => eps_greedy(
                &values,
                &candidates,
                epsilon,
                eval_rng.expect("evaluation stream"),
            ),
        };
        Ok(GoalId(g))
    }

    fn play<E: Environment + ?Sized>(
        &mut self,
        env: &mut E,
        critic: &InternalCritic,
        mode: Mode,
        env_rng: &mut RngStream,
        mut eval_rng: Option<&mut RngStream>,
    ) -> Result<EpisodeTrace> {
        let learning = matches!(mode, Mode::Train(_));
        let actions: Vec<usize> = (0..self.actions).collect();
        let mut trace = EpisodeTrace::new(env.location_count());
        let mut state = env.reset(env_rng);
        let mut goal = self.pick_goal(state, &mode, eval_rng.as_deref_mut())?;
        let mut terminal = false;
        while !terminal {
            let start = state;
            let mut option_reward = 0.0;
            let mut option_steps = 0;
            let mut reached = false;
            let epsilon = match mode {
                Mode::Train(_) => self.controller_epsilon(goal),
                Mode::Eval { epsilon } => epsilon,
            };
            while !(terminal || reached) {
                let values = self.controller.evaluate(state, Some(goal))?;
                let rng = match eval_rng.as_deref_mut() {
                    Some(r) => r,
                    None => &mut self.controller_rng,
                };
                let action = ActionId(eps_greedy(&values, &actions, epsilon, rng));
                let out = env.step(action, env_rng)?;
                let verdict = critic.evaluate(goal, state, action, out.next_state, env)?;
                reached = verdict.reached;
                terminal = out.terminal;
                if learning {
                    self.d1.push(ControllerTransition {
                        state,
                        goal,
                        action,
                        intrinsic_reward: verdict.intrinsic_reward,
                        next_state: out.next_state,
                        terminal: terminal || reached,
                    });
                    self.train_step()?;
                    self.primitive_steps += 1;
                }
                option_reward += out.extrinsic_reward;
                option_steps += 1;
                trace.extrinsic_reward += out.extrinsic_reward;
                trace.steps += 1;
                let loc = env.location_index(env.agent_location(out.next_state));
                trace.visits[loc] += 1;
                state = out.next_state;
            }
            if learning {
                self.d2.push(MetaTransition {
                    state: start,
                    goal,
                    extrinsic_sum: option_reward,
                    next_state: state,
                    terminal,
                });
                self.tracker.record(goal, reached);
            }
            trace.options.push(OptionRecord {
                goal,
                reached,
                steps: option_steps,
                extrinsic: option_reward,
            });
            if !terminal {
                goal = self.pick_goal(state, &mode, eval_rng.as_deref_mut())?;
            }
        }
        Ok(trace)
    }

    /// One update of each level, as done after every primitive step.
    fn train_step(&mut self) -> Result<()> {
        let s = &self.settings;
        let ctrl = UpdateSettings {
            minibatch: s.minibatch,
            warmup: s.warmup_controller,
            gamma: s.gamma,
        };
        let meta = UpdateSettings {
            minibatch: s.minibatch,
            warmup: s.warmup_meta,
            gamma: s.meta_gamma,
        };
        let sync = s.target_sync.max(1);
        if update_params(&mut self.controller, &self.d1, &ctrl, &mut self.replay1_rng)?.is_some() {
            self.controller_updates += 1;
            if self.controller_updates % sync == 0 {
                self.controller.sync_target();
            }
        }
        if update_params(&mut self.meta, &self.d2, &meta, &mut self.replay2_rng)?.is_some() {
            self.meta_updates += 1;
            if self.meta_updates % sync == 0 {
                self.meta.sync_target();
            }
        }
        Ok(())
    }
}
