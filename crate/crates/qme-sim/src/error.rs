use thiserror::Error;

/// Errors surfaced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}: only 1- and 2-qubit operators are handled")]
    UnsupportedDimension(usize),
    #[error("invalid subsystem index {0} for a two-qubit state")]
    BadSubsystem(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("matrix is not unitary (max |U\u{2020}U - I| = {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not a valid density operator: {0}")]
    NotAState(String),
    #[error("invalid measurement strength: {0}")]
    InvalidStrength(String),
    #[error("p = {0} is outside the engine regime (1/2, 1]")]
    OutsideEngineRegime(f64),
    #[error("degenerate cycle: {0}")]
    DegenerateCycle(String),
    #[error("state is not thermal (population of |0> must exceed population of |1>)")]
    NotThermal,
    #[error("map is not trace preserving (max deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("unstable Monte Carlo estimate: {discarded} of {total} samples discarded")]
    UnstableEstimate { discarded: usize, total: usize },
    #[error("nothing to plot: empty table")]
    NothingToPlot,
    #[error("malformed pulse sequence: {0}")]
    BadSequence(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
