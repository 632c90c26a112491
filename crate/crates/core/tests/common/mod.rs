#![allow(dead_code)]

use std::path::PathBuf;

use hdqn::agent::{EpsilonSchedule, HdqnAgent, HdqnSettings, Phase};
use hdqn::approx::{EncodedInput, MlpQ, QFunction, QTable};
use hdqn::critic::{GoalId, InternalCritic};
use hdqn::env::{ChainEnv, Environment, StateId};
use hdqn::harness::{ExperimentConfig, SeedRun};
use hdqn::replay::ReplayBuffer;
use hdqn::rng::RngStream;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

pub fn load_config(name: &str) -> ExperimentConfig {
    ExperimentConfig::from_file(&config_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

// ---------------------------------------------------------------- gradient check

/// Forward pass written out from the public layer fields, returning every hidden
/// pre-activation and the network output.
fn reference_forward(net: &MlpQ, x: &EncodedInput) -> (Vec<f64>, Vec<f64>) {
    let mut a = x.to_dense();
    let mut pre = Vec::new();
    let layers = net.layers();
    for (k, l) in layers.iter().enumerate() {
        let mut z = l.b.clone();
        for (i, &ai) in a.iter().enumerate() {
            for (j, zj) in z.iter_mut().enumerate() {
                *zj += ai * l.w[i * l.outputs + j];
            }
        }
        if k + 1 < layers.len() {
            pre.extend_from_slice(&z);
            a = z.iter().map(|v| v.max(0.0)).collect();
        } else {
            a = z;
        }
    }
    (pre, a)
}

pub struct GradientCheck {
    pub instances: usize,
    pub worst_relative_error: f64,
    pub failures: usize,
    pub forward_mismatches: usize,
}

/// Compare analytic gradients with central differences on random networks, inputs and
/// targets. Instances with a hidden pre-activation within 1e-3 of the ReLU kink are
/// redrawn, since the loss is not differentiable there.
pub fn gradient_check(instances: usize, h: f64, tolerance: f64, seed: u64) -> GradientCheck {
    let mut rng = RngStream::new(seed, 99);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut forward_mismatches = 0;
    let mut done = 0;
    while done < instances {
        let states = 2 + rng.index(6);
        let goals = rng.index(4);
        let depth = 1 + rng.index(2);
        let hidden: Vec<usize> = (0..depth).map(|_| 2 + rng.index(7)).collect();
        let outputs = 1 + rng.index(4);
        let mut net = MlpQ::zeros(states, goals, &hidden, outputs, 0.1);
        let n_params = net.parameters().len();
        let params: Vec<f64> = (0..n_params).map(|_| rng.uniform() * 2.0 - 1.0).collect();
        net.set_parameters(&params);
        let batch = 1 + rng.index(5);
        let inputs: Vec<(EncodedInput, usize, f64)> = (0..batch)
            .map(|_| {
                let s = StateId(rng.index(states));
                let g = (goals > 0).then(|| GoalId(rng.index(goals)));
                let x = net.encode(s, g).unwrap();
                (x, rng.index(outputs), rng.uniform() * 4.0 - 2.0)
            })
            .collect();
        let near_kink = inputs.iter().any(|(x, _, _)| {
            let (pre, out) = reference_forward(&net, x);
            let lib = net.forward(x);
            if out.iter().zip(&lib).any(|(a, b)| (a - b).abs() > 1e-12) {
                forward_mismatches += 1;
            }
            pre.iter().any(|z| z.abs() < 1e-3)
        });
        if near_kink {
            continue;
        }
        let (_, grad) = net.gradient(&inputs);
        let analytic = grad.flatten();
        let mut numeric = vec![0.0; n_params];
        for p in 0..n_params {
            let mut plus = params.clone();
            plus[p] += h;
            net.set_parameters(&plus);
            let lp = net.loss(&inputs);
            let mut minus = params.clone();
            minus[p] -= h;
            net.set_parameters(&minus);
            let lm = net.loss(&inputs);
            numeric[p] = (lp - lm) / (2.0 * h);
        }
        net.set_parameters(&params);
        let diff: f64 = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = (norm(&analytic) + norm(&numeric)).max(1e-12);
        let rel = diff / scale;
        worst = worst.max(rel);
        if rel >= tolerance {
            failures += 1;
        }
        done += 1;
    }
    GradientCheck {
        instances: done,
        worst_relative_error: worst,
        failures,
        forward_mismatches,
    }
}

// ---------------------------------------------------------------- replay / schedule

/// Every capacity in 1..=12 and push count in 0..=40: contents are the newest
/// `min(pushed, capacity)` items in insertion order.
pub fn fifo_exhaustive() -> Result<usize, String> {
    let mut cases = 0;
    for cap in 1..=12 {
        for pushed in 0..=40usize {
            let mut b = ReplayBuffer::new(cap);
            for i in 0..pushed {
                b.push(i);
            }
            let got: Vec<usize> = b.iter().copied().collect();
            let want: Vec<usize> = (pushed.saturating_sub(cap)..pushed).collect();
            if got != want {
                return Err(format!("capacity {cap}, pushed {pushed}: {got:?}"));
            }
            cases += 1;
        }
    }
    Ok(cases)
}

/// Chi-square goodness of fit of minibatch draws from a 10-item buffer.
pub fn sampling_p_value(draws: usize, seed: u64) -> f64 {
    let mut b = ReplayBuffer::new(10);
    for i in 0..10usize {
        b.push(i);
    }
    let mut rng = RngStream::new(seed, 3);
    let mut counts = [0usize; 10];
    let mut left = draws;
    while left > 0 {
        let k = left.min(32);
        for item in b.sample(k, &mut rng).unwrap() {
            counts[item] += 1;
        }
        left -= k;
    }
    let expected = draws as f64 / 10.0;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    1.0 - ChiSquared::new(9.0).unwrap().cdf(stat)
}

/// ε is non-increasing, starts at `start` and sits at `floor` from the horizon on.
pub fn schedule_ok(s: &EpsilonSchedule, start: f64, floor: f64, horizon: u64) -> bool {
    let mut prev = s.value(0);
    if (prev - start).abs() > 1e-12 {
        return false;
    }
    for t in 1..=horizon + 1000 {
        let e = s.value(t);
        if e > prev || (t >= horizon && (e - floor).abs() > 1e-12) {
            return false;
        }
        prev = e;
    }
    true
}

pub struct AgentInvariants {
    pub primitive_steps: u64,
    pub options: u64,
    pub d1: u64,
    pub d2: u64,
    pub goal_switches_inside_options: usize,
    pub ungated_rewards: usize,
}

/// Train a chain agent and audit its memories: option/step counts, goal persistence
/// inside options and intrinsic-reward gating.
pub fn audit_chain_agent(episodes: usize, seed: u64) -> AgentInvariants {
    let mut env = ChainEnv::new();
    let critic = InternalCritic::for_env(&env);
    let g = critic.goal_count();
    let settings = HdqnSettings {
        replay_controller: 1_000_000,
        replay_meta: 1_000_000,
        ..HdqnSettings::default()
    };
    let mut agent = HdqnAgent::new(
        QFunction::Tabular(QTable::new(6, g, 2, 0.01)),
        QFunction::Tabular(QTable::new(6, 0, g, 0.01)),
        settings,
        seed,
    )
    .unwrap();
    let mut rng = RngStream::new(seed, 0);
    let mut steps = 0u64;
    let mut options = 0u64;
    for _ in 0..episodes {
        let t = agent.run_episode(&mut env, &critic, Phase::Joint, &mut rng).unwrap();
        steps += t.steps as u64;
        options += t.options.len() as u64;
    }
    let mut switches = 0;
    let mut ungated = 0;
    let mut prev: Option<(GoalId, bool)> = None;
    for tr in agent.controller_memory().iter() {
        if let Some((goal, ended)) = prev {
            if !ended && goal != tr.goal {
                switches += 1;
            }
        }
        if tr.intrinsic_reward > 0.0 {
            let target = env.target_location(&critic.goals()[tr.goal.0].target);
            if target != Some(env.agent_location(tr.next_state)) {
                ungated += 1;
            }
        }
        prev = Some((tr.goal, tr.terminal));
    }
    AgentInvariants {
        primitive_steps: steps,
        options,
        d1: agent.controller_memory().total_pushed(),
        d2: agent.meta_memory().total_pushed(),
        goal_switches_inside_options: switches,
        ungated_rewards: ungated,
    }
}

// ---------------------------------------------------------------- run statistics

/// Mean visits per episode to chain positions 4, 5 and 6 over a slice of episodes.
pub fn chain_visits(run: &SeedRun, from: usize, to: usize) -> [f64; 3] {
    let eps = &run.episodes[from..to];
    let n = eps.len() as f64;
    let mut out = [0.0; 3];
    for e in eps {
        // Summary visit columns are positions 3, 4, 5, 6.
        for k in 0..3 {
            out[k] += f64::from(e.visits[k + 1]);
        }
    }
    out.map(|v| v / n)
}

pub struct DecileStats {
    pub key_success_first: f64,
    pub key_success_last: f64,
    pub pick_first: Vec<f64>,
    pub pick_last: Vec<f64>,
    pub total_variation: f64,
}

fn decile(run: &SeedRun, index: usize) -> (Vec<u64>, Vec<u64>) {
    let n = run.episodes.len();
    let (from, to) = (index * n / 10, (index + 1) * n / 10);
    let goals = run.goal_labels.len();
    let mut picks = vec![0u64; goals];
    let mut succ = vec![0u64; goals];
    for e in &run.episodes[from..to] {
        for g in 0..goals {
            picks[g] += u64::from(e.picks[g]);
            succ[g] += u64::from(e.successes[g]);
        }
    }
    (picks, succ)
}

pub fn decile_stats(run: &SeedRun) -> DecileStats {
    let key = run.goal_labels.iter().position(|l| l == "key").expect("key goal");
    let (p0, s0) = decile(run, 0);
    let (p9, s9) = decile(run, 9);
    let rate = |s: &[u64], p: &[u64]| if p[key] == 0 { 0.0 } else { s[key] as f64 / p[key] as f64 };
    let dist = |p: &[u64]| {
        let total: u64 = p.iter().sum();
        p.iter().map(|&c| c as f64 / total.max(1) as f64).collect::<Vec<f64>>()
    };
    let (d0, d9) = (dist(&p0), dist(&p9));
    let tv = 0.5 * d0.iter().zip(&d9).map(|(a, b)| (a - b).abs()).sum::<f64>();
    DecileStats {
        key_success_first: rate(&s0, &p0),
        key_success_last: rate(&s9, &p9),
        pick_first: d0,
        pick_last: d9,
        total_variation: tv,
    }
}
