//! Error types shared across the crate.

use thiserror::Error;

/// Anything that can go wrong while building or running a simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input document (position comes from the JSON parser).
    #[error("syntax error in {context}: {source}")]
    Syntax {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    /// A document parsed but violates an invariant. The message names it.
    #[error("validation error: {0}")]
    Validation(String),

    /// A population, layer, or core reference that does not resolve.
    #[error("unknown reference: {kind} \"{name}\"")]
    UnknownReference { kind: &'static str, name: String },

    /// The network does not fit the machine.
    #[error("capacity exceeded: population \"{population}\" needs {needed} more neuron slots (machine holds {capacity})")]
    CapacityExceeded {
        population: String,
        needed: u64,
        capacity: u64,
    },

    /// A chip's routing table grew past the configured capacity.
    #[error("routing table capacity exceeded on chip ({chip_x},{chip_y}): {entries} entries > capacity {capacity}")]
    TableCapacityExceeded {
        chip_x: u16,
        chip_y: u16,
        entries: usize,
        capacity: usize,
    },

    /// Exponential unit input outside its supported domain.
    #[error("exp unit domain error: input {value} > 0")]
    ExpDomain { value: f64 },

    /// MAC array operand shapes disagree.
    #[error("mac dimension mismatch: {0}")]
    MacDimension(String),

    /// Checkpoint does not belong to the supplied config/network pair.
    #[error("checkpoint mismatch: {0}")]
    CheckpointMismatch(String),

    /// File I/O, with the path that failed.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// An internal invariant tripped; indicates a bug, not bad input.
    #[error("internal invariant violation: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 for bad input, 2 for internal bugs.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
