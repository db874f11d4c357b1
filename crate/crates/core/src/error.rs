use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not positive semidefinite (least eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("missing weight at vertex {0}")]
    MissingWeight(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("unknown exhibit `{0}`")]
    UnknownExhibit(String),
    #[error("numerical breakdown: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
