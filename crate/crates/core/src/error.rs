use thiserror::Error;

/// Errors produced by waveform construction, addressing, gates and the demos built on them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitIndex { qubit: usize, n_qubits: usize },

    #[error("product basis is not orthogonal for frequencies {0:?} (redundant Fourier spectrum)")]
    NonOrthogonalBasis(Vec<u64>),

    #[error("gate error: {0}")]
    Gate(String),

    #[error("circuit error: {0}")]
    Circuit(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("measurement on a null state (qubit {0})")]
    MeasurementOnNull(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0}")]
    Io(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
