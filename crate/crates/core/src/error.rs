use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("code distance must be odd, got {0}")]
    EvenDistance(usize),

    #[error("code distance must be positive")]
    ZeroDistance,

    #[error("operator sizes differ: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("CNOT control and target must differ (both {0})")]
    SameQubit(usize),

    #[error("probability {name}={value} outside [0, 1]")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("round count must be at least 1")]
    NoRounds,

    #[error("negative disorder sigma {0} MHz")]
    NegativeSigma(f64),

    #[error("brute-force matching supports at most {max} defects, got {got}")]
    TooManyDefects { got: usize, max: usize },

    #[error("defect {0:?} is not a node of the matching graph")]
    UnknownDetector((usize, usize)),

    #[error("defect at node {0} cannot reach any partner")]
    Disconnected(usize),

    #[error("no crossing found between the logical error curves in the scanned range")]
    NoCrossing,

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}
