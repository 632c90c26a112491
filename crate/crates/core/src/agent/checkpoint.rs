//! Agent checkpoints: value-function parameter blocks plus agent bookkeeping.
//!
//! ```text
//! magic     8 bytes  "HDQNCKPT"
//! version   u32 LE   1
//! agent     u8       0 = h-DQN, 1 = flat baseline
//! env name  u32 LE length + UTF-8 bytes
//! states    u32 LE
//! actions   u32 LE
//! h-DQN:    controller parameter block, meta parameter block,
//!           tracker section: goals u32, window u32, then per goal
//!             attempts u32 + one byte (0/1) per attempt, oldest first,
//!           meta_steps u64, primitive_steps u64
//! baseline: parameter block, steps u64
//! ```
//!
//! Parameter blocks use the format of [`crate::approx::write_q_function`].

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{FlatAgent, GoalSuccessTracker, HdqnAgent, HdqnSettings};
use crate::approx::{read_q_function, write_q_function, QFunction, ValueFunction};
use crate::critic::GoalId;
use crate::error::{Error, Result};

pub const MAGIC_CHECKPOINT: &[u8; 8] = b"HDQNCKPT";
const VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub enum AgentCheckpoint {
    Hdqn { env: String, agent: HdqnAgent },
    Flat { env: String, agent: FlatAgent },
}

impl AgentCheckpoint {
    pub fn env_name(&self) -> &str {
        match self {
            AgentCheckpoint::Hdqn { env, .. } | AgentCheckpoint::Flat { env, .. } => env,
        }
    }

    pub fn state_count(&self) -> usize {
        match self {
            AgentCheckpoint::Hdqn { agent, .. } => agent.controller().state_count(),
            AgentCheckpoint::Flat { agent, .. } => agent.table().state_count(),
        }
    }

    pub fn action_count(&self) -> usize {
        match self {
            AgentCheckpoint::Hdqn { agent, .. } => agent.action_count(),
            AgentCheckpoint::Flat { agent, .. } => agent.table().output_count(),
        }
    }

    pub fn write<W: Write>(&self, out: &mut W) -> Result<()> {
        out.write_all(MAGIC_CHECKPOINT)?;
        out.write_all(&VERSION.to_le_bytes())?;
        let kind = match self {
            AgentCheckpoint::Hdqn { .. } => 0u8,
            AgentCheckpoint::Flat { .. } => 1u8,
        };
        out.write_all(&[kind])?;
        let name = self.env_name().as_bytes();
        out.write_all(&(name.len() as u32).to_le_bytes())?;
        out.write_all(name)?;
        out.write_all(&(self.state_count() as u32).to_le_bytes())?;
        out.write_all(&(self.action_count() as u32).to_le_bytes())?;
        match self {
            AgentCheckpoint::Hdqn { agent, .. } => {
                write_q_function(out, agent.controller())?;
                write_q_function(out, agent.meta())?;
                let tracker = agent.tracker();
                out.write_all(&(tracker.goal_count() as u32).to_le_bytes())?;
                out.write_all(&(tracker.window() as u32).to_le_bytes())?;
                for g in 0..tracker.goal_count() {
                    let hist: Vec<u8> = tracker.history(GoalId(g)).map(u8::from).collect();
                    out.write_all(&(hist.len() as u32).to_le_bytes())?;
                    out.write_all(&hist)?;
                }
                out.write_all(&agent.meta_steps().to_le_bytes())?;
                out.write_all(&agent.primitive_steps().to_le_bytes())?;
            }
            AgentCheckpoint::Flat { agent, .. } => {
                write_q_function(out, &QFunction::Tabular(agent.table().clone()))?;
                out.write_all(&agent.steps().to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Restore a checkpoint. Training hyperparameters and random streams are not stored;
    /// `settings` and `seed` supply them.
    pub fn read<R: Read>(input: &mut R, settings: HdqnSettings, seed: u64) -> Result<Self> {
        let mut magic = [0u8; 8];
        read_exact(input, &mut magic)?;
        if &magic != MAGIC_CHECKPOINT {
            return Err(Error::Checkpoint("not an agent checkpoint".into()));
        }
        let version = read_u32(input)?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
        }
        let mut kind = [0u8; 1];
        read_exact(input, &mut kind)?;
        let name_len = read_u32(input)? as usize;
        if name_len > 256 {
            return Err(Error::Checkpoint("implausible environment name".into()));
        }
        let mut name = vec![0u8; name_len];
        read_exact(input, &mut name)?;
        let env = String::from_utf8(name)
            .map_err(|_| Error::Checkpoint("environment name is not UTF-8".into()))?;
        let states = read_u32(input)? as usize;
        let actions = read_u32(input)? as usize;
        let ckpt = match kind[0] {
            0 => {
                let controller = read_q_function(input)?;
                let meta = read_q_function(input)?;
                let goals = read_u32(input)? as usize;
                let window = read_u32(input)? as usize;
                let mut tracker = GoalSuccessTracker::new(goals, window);
                for g in 0..goals {
                    let n = read_u32(input)? as usize;
                    if n > window {
                        return Err(Error::Checkpoint("tracker history exceeds window".into()));
                    }
                    let mut hist = vec![0u8; n];
                    read_exact(input, &mut hist)?;
                    hist.iter().for_each(|&b| tracker.record(GoalId(g), b != 0));
                }
                let meta_steps = read_u64(input)?;
                let primitive_steps = read_u64(input)?;
                let settings = HdqnSettings {
                    success_window: window,
                    ..settings
                };
                let mut agent = HdqnAgent::new(controller, meta, settings, seed)?;
                if agent.goal_count() != goals {
                    return Err(Error::Checkpoint("tracker goal count mismatch".into()));
                }
                agent.restore(tracker, meta_steps, primitive_steps);
                AgentCheckpoint::Hdqn { env, agent }
            }
            1 => {
                let QFunction::Tabular(table) = read_q_function(input)? else {
                    return Err(Error::Checkpoint("baseline checkpoint must hold a table".into()));
                };
                let steps = read_u64(input)?;
                let mut agent = FlatAgent::from_table(table, settings.gamma, settings.meta_epsilon, seed);
                agent.set_steps(steps);
                AgentCheckpoint::Flat { env, agent }
            }
            other => return Err(Error::Checkpoint(format!("unknown agent kind {other}"))),
        };
        if ckpt.state_count() != states || ckpt.action_count() != actions {
            return Err(Error::Checkpoint("header shape disagrees with parameters".into()));
        }
        Ok(ckpt)
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::Checkpoint(format!("truncated: {e}")))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn save_checkpoint(path: &Path, ckpt: &AgentCheckpoint) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    ckpt.write(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path, settings: HdqnSettings, seed: u64) -> Result<AgentCheckpoint> {
    let mut r = BufReader::new(File::open(path)?);
    AgentCheckpoint::read(&mut r, settings, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{EpsilonSchedule, Phase};
    use crate::approx::QTable;
    use crate::critic::InternalCritic;
    use crate::env::{ChainEnv, StateId};
    use crate::rng::RngStream;

    #[test]
    fn hdqn_roundtrip_preserves_values_and_tracker() {
        let mut env = ChainEnv::new();
        let critic = InternalCritic::for_env(&env);
        let mut agent = HdqnAgent::new(
            QFunction::Tabular(QTable::new(6, 6, 2, 0.1)),
            QFunction::Tabular(QTable::new(6, 0, 6, 0.1)),
            HdqnSettings::default(),
            3,
        )
        .unwrap();
        let mut rng = RngStream::new(3, 0);
        for _ in 0..300 {
            agent.run_episode(&mut env, &critic, Phase::Joint, &mut rng).unwrap();
        }
        let ckpt = AgentCheckpoint::Hdqn {
            env: "chain".into(),
            agent: agent.clone(),
        };
        let mut buf = Vec::new();
        ckpt.write(&mut buf).unwrap();
        let AgentCheckpoint::Hdqn { env: name, agent: back } =
            AgentCheckpoint::read(&mut buf.as_slice(), HdqnSettings::default(), 3).unwrap()
        else {
            panic!("wrong agent kind");
        };
        assert_eq!(name, "chain");
        assert_eq!(back.tracker(), agent.tracker());
        assert_eq!(back.meta_steps(), agent.meta_steps());
        for s in 0..6 {
            assert_eq!(
                back.meta().evaluate(StateId(s), None).unwrap(),
                agent.meta().evaluate(StateId(s), None).unwrap()
            );
        }
    }

    #[test]
    fn flat_roundtrip() {
        let agent = FlatAgent::new(6, 2, 0.1, 0.99, EpsilonSchedule::default(), 0);
        let ckpt = AgentCheckpoint::Flat {
            env: "chain".into(),
            agent,
        };
        let mut buf = Vec::new();
        ckpt.write(&mut buf).unwrap();
        let back = AgentCheckpoint::read(&mut buf.as_slice(), HdqnSettings::default(), 0).unwrap();
        assert!(matches!(back, AgentCheckpoint::Flat { .. }));
        assert_eq!(back.state_count(), 6);
    }

    #[test]
    fn truncated_checkpoint_fails() {
        let agent = FlatAgent::new(6, 2, 0.1, 0.99, EpsilonSchedule::default(), 0);
        let mut buf = Vec::new();
        AgentCheckpoint::Flat {
            env: "chain".into(),
            agent,
        }
        .write(&mut buf)
        .unwrap();
        buf.truncate(20);
        assert!(AgentCheckpoint::read(&mut buf.as_slice(), HdqnSettings::default(), 0).is_err());
    }
}
