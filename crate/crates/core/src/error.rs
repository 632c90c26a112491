use thiserror::Error;

/// Errors raised by environments, value functions, agents and the experiment harness.
///
/// Contract violations (stepping a finished episode, out-of-range indices, foreign goals)
/// are reported as errors rather than silently clamped.
#[derive(Debug, Error)]
pub enum Error {
    #[error("episode is terminal; reset before stepping")]
    TerminalStep,

    #[error("{what} index {index} out of range (size {size})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("goal {0} is not part of this environment's goal set")]
    UnknownGoal(usize),

    #[error("cannot sample from an empty replay buffer")]
    EmptyBuffer,

    #[error("non-finite loss {loss} at training step {step}")]
    Divergence { loss: f64, step: u64 },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("non-finite metric {name} (seed {seed}, episode {episode})")]
    NonFiniteMetric {
        name: String,
        seed: u64,
        episode: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_index(what: &'static str, index: usize, size: usize) -> Result<()> {
    if index < size {
        Ok(())
    } else {
        Err(Error::OutOfRange { what, index, size })
    }
}
