//! Per-episode summaries, trailing-window metrics and CSV output.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a value read back
//! from a CSV is bit-identical to the one that was written.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::agent::EpisodeTrace;
use crate::error::{Error, Result};

/// Chain positions reported in the visit columns.
pub const CHAIN_VISIT_POSITIONS: [usize; 4] = [3, 4, 5, 6];

pub const CHAIN_HEADER: &str = "seed,episode,reward_ma,visits_s3,visits_s4,visits_s5,visits_s6";
pub const KEYDOOR_HEADER: &str = "seed,episode,reward_ma,goal,pick_frac,success_rate";

/// What is kept from one training episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub reward: f64,
    pub steps: usize,
    /// Entries into chain positions 3..=6 (empty for other environments).
    pub visits: Vec<u32>,
    pub picks: Vec<u32>,
    pub successes: Vec<u32>,
}

impl EpisodeSummary {
    pub fn from_trace(trace: &EpisodeTrace, goals: usize, chain: bool) -> Self {
        let mut picks = vec![0; goals];
        let mut successes = vec![0; goals];
        for o in &trace.options {
            picks[o.goal.0] += 1;
            successes[o.goal.0] += u32::from(o.reached);
        }
        let visits = if chain {
            CHAIN_VISIT_POSITIONS.iter().map(|&p| trace.visits[p - 1]).collect()
        } else {
            Vec::new()
        };
        Self {
            reward: trace.extrinsic_reward,
            steps: trace.steps,
            visits,
            picks,
            successes,
        }
    }
}

/// One logged point of a seed's learning curve.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub seed: u64,
    /// Number of episodes completed (1-based).
    pub episode: usize,
    pub reward_ma: f64,
    /// Mean visits per episode to positions 3..=6 over the visit window (chain only).
    pub visits: Vec<f64>,
    /// Share of goal picks per goal over the reward window.
    pub pick_frac: Vec<f64>,
    /// Share of picks per goal that ended with the goal reached; 0 when never picked.
    pub success_rate: Vec<f64>,
}

struct Window<T> {
    cap: usize,
    items: VecDeque<T>,
}

impl<T> Window<T> {
    fn new(cap: usize) -> Self {
        Self {
            cap,
            items: VecDeque::with_capacity(cap),
        }
    }

    fn push(&mut self, item: T) -> Option<T> {
        self.items.push_back(item);
        if self.items.len() > self.cap {
            self.items.pop_front()
        } else {
            None
        }
    }
}

/// Trailing-window statistics over a seed's episode summaries, one row every `log_every`
/// episodes and at the final episode.
pub fn metric_rows(
    seed: u64,
    episodes: &[EpisodeSummary],
    reward_window: usize,
    visit_window: usize,
    log_every: usize,
) -> Result<Vec<MetricRow>> {
    let goals = episodes.first().map_or(0, |e| e.picks.len());
    let nvis = episodes.first().map_or(0, |e| e.visits.len());
    let mut rewards = Window::new(reward_window);
    let mut visits = Window::new(visit_window);
    let mut visit_sum = vec![0u64; nvis];
    let mut goal_win = Window::new(reward_window);
    let mut pick_sum = vec![0u64; goals];
    let mut success_sum = vec![0u64; goals];
    let mut rows = Vec::new();
    for (i, ep) in episodes.iter().enumerate() {
        rewards.push(ep.reward);
        for (s, v) in visit_sum.iter_mut().zip(&ep.visits) {
            *s += u64::from(*v);
        }
        if let Some(old) = visits.push(ep.visits.clone()) {
            for (s, v) in visit_sum.iter_mut().zip(&old) {
                *s -= u64::from(*v);
            }
        }
        for g in 0..goals {
            pick_sum[g] += u64::from(ep.picks[g]);
            success_sum[g] += u64::from(ep.successes[g]);
        }
        if let Some((p, s)) = goal_win.push((ep.picks.clone(), ep.successes.clone())) {
            for g in 0..goals {
                pick_sum[g] -= u64::from(p[g]);
                success_sum[g] -= u64::from(s[g]);
            }
        }
        let n = i + 1;
        if n % log_every != 0 && n != episodes.len() {
            continue;
        }
        let reward_ma = rewards.items.iter().sum::<f64>() / rewards.items.len() as f64;
        let vn = visits.items.len() as f64;
        let total_picks: u64 = pick_sum.iter().sum();
        let row = MetricRow {
            seed,
            episode: n,
            reward_ma,
            visits: visit_sum.iter().map(|&v| v as f64 / vn).collect(),
            pick_frac: pick_sum
                .iter()
                .map(|&p| if total_picks == 0 { 0.0 } else { p as f64 / total_picks as f64 })
                .collect(),
            success_rate: pick_sum
                .iter()
                .zip(&success_sum)
                .map(|(&p, &s)| if p == 0 { 0.0 } else { s as f64 / p as f64 })
                .collect(),
        };
        check_finite(&row)?;
        rows.push(row);
    }
    Ok(rows)
}

fn check_finite(row: &MetricRow) -> Result<()> {
    let bad = |name: &'static str| Error::NonFiniteMetric {
        name: name.to_string(),
        seed: row.seed,
        episode: row.episode,
    };
    if !row.reward_ma.is_finite() {
        return Err(bad("reward_ma"));
    }
    if row.visits.iter().any(|v| !v.is_finite()) {
        return Err(bad("visits"));
    }
    if row.pick_frac.iter().chain(&row.success_rate).any(|v| !v.is_finite()) {
        return Err(bad("goal statistics"));
    }
    Ok(())
}

pub fn chain_csv(rows: &[MetricRow]) -> String {
    let mut out = String::from(CHAIN_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{},{}", r.seed, r.episode, r.reward_ma);
        for v in &r.visits {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Long format: one line per (logged episode, goal). Agents without goals get one line
/// per episode with goal `none`.
pub fn keydoor_csv(rows: &[MetricRow], labels: &[String]) -> String {
    let mut out = String::from(KEYDOOR_HEADER);
    out.push('\n');
    for r in rows {
        if labels.is_empty() {
            let _ = writeln!(out, "{},{},{},none,0,0", r.seed, r.episode, r.reward_ma);
        }
        for (g, label) in labels.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.seed, r.episode, r.reward_ma, label, r.pick_frac[g], r.success_rate[g]
            );
        }
    }
    out
}

/// Mean and standard error (sample standard deviation over √n; 0 for a single value).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Aggregate across seeds, matching rows by episode index. Every seed must log the same
/// episodes.
pub fn aggregate_csv(per_seed: &[Vec<MetricRow>], labels: &[String], chain: bool) -> String {
    let mut out = String::new();
    if chain {
        out.push_str("episode,n_seeds,reward_ma_mean,reward_ma_se");
        for p in CHAIN_VISIT_POSITIONS {
            let _ = write!(out, ",visits_s{p}_mean,visits_s{p}_se");
        }
    } else {
        out.push_str(
            "episode,goal,n_seeds,reward_ma_mean,reward_ma_se,pick_frac_mean,pick_frac_se,success_rate_mean,success_rate_se",
        );
    }
    out.push('\n');
    let Some(first) = per_seed.first() else {
        return out;
    };
    let n = per_seed.len();
    for (i, row) in first.iter().enumerate() {
        let column = |f: &dyn Fn(&MetricRow) -> f64| -> (f64, f64) {
            let vals: Vec<f64> = per_seed.iter().map(|rows| f(&rows[i])).collect();
            mean_se(&vals)
        };
        let (rm, rs) = column(&|r| r.reward_ma);
        if chain {
            let _ = write!(out, "{},{n},{rm},{rs}", row.episode);
            for k in 0..row.visits.len() {
                let (m, s) = column(&|r| r.visits[k]);
                let _ = write!(out, ",{m},{s}");
            }
            out.push('\n');
        } else if labels.is_empty() {
            let _ = writeln!(out, "{},none,{n},{rm},{rs},0,0,0,0", row.episode);
        } else {
            for (g, label) in labels.iter().enumerate() {
                let (pm, ps) = column(&|r| r.pick_frac[g]);
                let (sm, ss) = column(&|r| r.success_rate[g]);
                let _ = writeln!(out, "{},{label},{n},{rm},{rs},{pm},{ps},{sm},{ss}", row.episode);
            }
        }
    }
    out
}
