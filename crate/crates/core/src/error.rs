use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative eigensolver stopped before every requested pair met the
    /// residual tolerance.
    #[error("eigensolver failed to converge after {iterations} iterations (worst residual {residual:.3e}, tolerance {tolerance:.3e})")]
    SolverFailure {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("dense decomposition failed: {0}")]
    Decomposition(String),

    #[error("integrator failed at t = {time}: {reason}")]
    Integrator { time: f64, reason: String },

    /// A matrix expected to be positive semidefinite has a clearly negative eigenvalue.
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("Gram matrix has rank {rank} < {dim}; collective modes are not independent")]
    RankDeficient { rank: usize, dim: usize },

    #[error("photon density at the reference point is {density:.3e}; correlation undefined")]
    UndefinedReference { density: f64 },

    #[error("emitter is resonant with the Landau level (detuning {detuning:.3e}); dispersive couplings diverge")]
    Resonant { detuning: f64 },

    #[error("disorder realization {index} failed: {source}")]
    Realization {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
