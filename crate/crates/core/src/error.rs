//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("two-qubit gate acts twice on qubit {0}")]
    RepeatedQubit(usize),

    #[error("non-finite angle {0}")]
    NonFiniteAngle(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{requested} qubits exceeds the simulator cap of {cap} for {what}")]
    TooManyQubits {
        requested: usize,
        cap: usize,
        what: &'static str,
    },

    #[error("channel strength {0} outside [0, 1]")]
    InvalidStrength(f64),

    #[error("shot count must be at least one")]
    ZeroShots,

    #[error("entangling ring needs at least two qubits, got {0}")]
    RingTooSmall(usize),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("label {0} lies outside [0, 1]; apply a target scaling first")]
    LabelOutOfRange(f64),

    #[error("normal equations are singular; use a positive ridge")]
    SingularSystem,

    #[error("objective returned {value} at coordinate {coordinate:?}")]
    NonFiniteObjective {
        coordinate: Option<usize>,
        value: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
