use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("second-order condition violated for player {player} at stage {stage}: max eigenvalue {max_eig:e}")]
    SecondOrder { player: usize, stage: usize, max_eig: f64 },
    #[error("ill-conditioned stage for player {player} at stage {stage}: condition number {cond:e}")]
    IllConditioned { player: usize, stage: usize, cond: f64 },
    #[error("enumeration cap exceeded: {0}")]
    Cap(String),
    #[error("off-support update: {0}")]
    OffSupport(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
