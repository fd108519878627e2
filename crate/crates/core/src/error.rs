use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("network has no spanning tree: {0}")]
    NoSpanningTree(String),

    #[error("node {0} is not a center node")]
    NotCenter(usize),

    #[error("node {0} never updates but has incoming weights")]
    ZeroUpdateProbability(usize),

    #[error("matrix is not Hurwitz (largest real part {0:e})")]
    NotHurwitz(f64),

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("singular linear system: {0}")]
    Singular(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Errors caused by bad input rather than by the environment or the
    /// numerics of a particular run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::NoSpanningTree(_)
                | Error::NotCenter(_)
                | Error::ZeroUpdateProbability(_)
                | Error::Config(_)
        )
    }
}
