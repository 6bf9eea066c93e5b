use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("structure mismatch: {0}")]
    Structure(String),
    #[error("tree contains a cycle through vertex `{0}`")]
    Cycle(String),
    #[error("tree is disconnected ({0} components)")]
    Disconnected(usize),
    #[error("tree has zero total measure")]
    ZeroMeasure,
    #[error("point lies outside the space: {0}")]
    OutsideSpace(String),
    #[error("function is not a polynomial: {0}")]
    NotPolynomial(String),
    #[error("profile is not supported in [0, 1): {0}")]
    ProfileSupport(String),
    #[error("evaluation point {point} is not below 1 (delta = {delta} too small for n = {n})")]
    EvaluationPoint { n: usize, delta: f64, point: f64 },
    #[error("duplicate delta {0}")]
    DuplicateDelta(f64),
    #[error("invalid displaceability certificate: {0}")]
    InvalidCertificate(String),
    #[error("cover unsatisfiable: {0}")]
    CoverUnsatisfiable(String),
    #[error("piece {index} has no displaceability certificate (gamma too large?)")]
    MissingCertificate { index: usize },
    #[error("internal check failed: {0}")]
    Check(String),
}

pub type Result<T> = std::result::Result<T, Error>;
