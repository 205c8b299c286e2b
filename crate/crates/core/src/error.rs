use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("multiplicity must be an even integer >= 10, got {0}")]
    InvalidMultiplicity(i64),

    #[error("similarity with unit scale has no unique fixed point")]
    NoUniqueFixedPoint,

    #[error("point is claimed by children {first} and {second}")]
    MultipleChildren { first: usize, second: usize },

    #[error("curves are too close for the Gauss integral (separation {separation:e})")]
    MinSeparationTooSmall { separation: f64 },

    #[error("no generic projection direction found after {attempts} attempts")]
    NoGenericProjection { attempts: usize },

    #[error("linking computation failed for pair ({i}, {j}): {source}")]
    LinkPair {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("map is undefined at the origin")]
    UndefinedAtOrigin,

    #[error("Jacobian is numerically singular (sigma_min / sigma_max = {ratio:e})")]
    NonInvertibleJacobian { ratio: f64 },

    #[error("box counts are identical at every scale; slope is undefined")]
    DegenerateFit,

    #[error("stage has {count} tori, above the export cap of 1e6")]
    TooManyTori { count: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
