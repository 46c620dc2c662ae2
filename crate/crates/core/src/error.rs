use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("{0}")]
    Range(String),
    #[error("signal {0} has positive weight but no equilibrium profile")]
    MissingProfile(usize),
    #[error("invalid decomposition: {0}")]
    Decomposition(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("LP dimension mismatch: {0}")]
    Dimension(String),
    #[error("LP has a non-finite coefficient")]
    NonFinite,
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("{what} too large: {required} elements exceed the cap of {cap}")]
    TooLarge { what: &'static str, required: u128, cap: u128 },
    #[error("no decomposition over supplied candidates")]
    NoDecomposition,
    #[error("internal error: {0}")]
    Internal(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("sampler produced an invalid matrix: {0}")]
    Sampler(String),
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("malformed document: {0}")]
    Syntax(String),
    #[error("{0}")]
    Field(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid sampler spec: {0}")]
    SamplerSpec(String),
}
