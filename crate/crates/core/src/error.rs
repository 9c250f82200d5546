use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is not symmetric (max relative asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("matrix is singular")]
    Singular,

    #[error("graph contains a cycle through: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("rank-deficient design for variable `{variable}` in model `{model}`")]
    RankDeficient { model: String, variable: String },

    #[error("too few observations: need at least {needed}, have {have}")]
    TooFewObservations { needed: usize, have: usize },

    #[error("duplicate points at rows {0} and {1}; deduplicate or enable jitter")]
    DuplicatePoints(usize, usize),

    #[error("non-identifiable projection: {models} models cannot pin a point in {dim} dimensions (need at least {needed})")]
    NonIdentifiable { models: usize, dim: usize, needed: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for failures of the numerics (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotPositiveDefinite
            | Error::Singular
            | Error::RankDeficient { .. }
            | Error::DuplicatePoints(..) => true,
            Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
