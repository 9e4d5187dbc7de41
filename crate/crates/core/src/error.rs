use crate::constraint::{RankReport, TransversalityReport};
use crate::expr::{EvalError, ParseError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{field}: {source}")]
    Parse {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("metric is not positive definite at q = {q:?} (eigenvalues {eigenvalues:?})")]
    NotPositiveDefinite { q: Vec<f64>, eigenvalues: Vec<f64> },
    #[error("metric is ill-conditioned at q = {q:?} (condition estimate {cond:e})")]
    IllConditioned { q: Vec<f64>, cond: f64 },
    #[error("constraint rank defect: {0}")]
    RankDefect(RankReport),
    #[error("transversality violation: {0}")]
    Transversality(TransversalityReport),
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite state at t = {t} (last good sample {last_good_sample})")]
    NonFinite { t: f64, last_good_sample: usize },
    #[error("RK4 stage {stage} failed at q = {q:?}, qdot = {qdot:?}: {source}")]
    StageFailed {
        stage: usize,
        q: Vec<f64>,
        qdot: Vec<f64>,
        #[source]
        source: Box<Error>,
    },
    #[error("integration aborted at t = {t} (last good sample {last_good_sample}): {source}")]
    IntegrationAborted {
        t: f64,
        last_good_sample: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
