//! Error type shared across the crate.

use thiserror::Error;

/// Errors reported by simulator and analysis operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Gate/state dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A qubit index is out of range or repeated between targets and controls.
    #[error("qubit index error: {0}")]
    IndexError(String),

    /// A live register would exceed the dense-storage cap
    /// (20 qubits for pure states, 12 for density matrices).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Input fails a structural invariant (non-Hermitian, non-unitary, bad norm).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A composite gate has no registered decomposition or count rule.
    #[error("unregistered composite gate: {0}")]
    UnregisteredComposite(String),

    /// A repeat-until-success loop ran out of trials.
    #[error("max trials exhausted after {0} attempts")]
    TrialsExhausted(u64),

    /// I/O or serialization failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON parse failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
