use thiserror::Error;

use crate::simplex::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability entry {index} is {value}; entries must be finite and non-negative")]
    InvalidProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, which is not within tolerance of 1")]
    NotNormalized { sum: f64 },

    #[error("empty probability vector")]
    EmptyPmf,

    #[error("row {row}: {source}")]
    InvalidRow {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("KL divergence is infinite: p has mass at index {index} where q has none")]
    InfiniteDivergence { index: usize },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("jammer budget {budget} is below the minimum feasible cost {min_cost}")]
    InfeasibleBudget { budget: f64, min_cost: f64 },

    #[error("no encoder satisfies the user budget {budget} (cheapest costs {min_cost})")]
    NoFeasibleEncoder { budget: f64, min_cost: f64 },

    #[error("search space of {size} candidates exceeds the limit of {limit}")]
    SearchTooLarge { size: f64, limit: f64 },

    #[error(transparent)]
    Lp(#[from] LpError),
}

impl Error {
    pub(crate) fn in_row(self, row: usize) -> Self {
        Error::InvalidRow {
            row,
            source: Box::new(self),
        }
    }
}
