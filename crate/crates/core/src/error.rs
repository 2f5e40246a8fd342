use thiserror::Error;

/// Errors raised by model construction, solvers and the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("operator is not Hermitian (max deviation {deviation:e}, tolerance {tolerance:e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("operator is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("qubit index {index} out of range for width {width}")]
    QubitOutOfRange { index: usize, width: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("outcome has zero probability; cannot renormalize")]
    ZeroProbability,

    #[error("steady state is not unique: {count} eigenvalues within the null tolerance")]
    NonUniqueNess { count: usize },

    #[error("steady state solve did not converge (residual {residual:e})")]
    Convergence { residual: f64 },

    #[error("input is not a valid density matrix: {0}")]
    InvalidDensity(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("postselection failed after {attempts} attempts")]
    PostselectionFailure { attempts: usize },

    #[error("degenerate output state: {0}")]
    DegenerateOutput(String),

    #[error("Pauli term of weight {weight} exceeds locality limit {limit}")]
    Locality { weight: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model file error: {0}")]
    ModelFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
