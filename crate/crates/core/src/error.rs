use alloc::string::String;

use crate::models::Coalition;

/// Errors raised by the identification toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix dimension {0} exceeds the supported maximum of 32")]
    TooLarge(usize),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is singular (det = {det:e})")]
    Singular { det: f64 },

    #[error("utility {value} of product {id}, criterion {criterion} is outside [0, 1]")]
    UtilityRange { id: u32, criterion: usize, value: f64 },

    #[error("product {id} has {found} criteria, expected {expected}")]
    CriteriaCount { id: u32, expected: usize, found: usize },

    #[error("duplicate product id {0}")]
    DuplicateId(u32),

    #[error("unknown product id {0}")]
    UnknownId(u32),

    #[error("sample {sample} lists product {id} twice")]
    DuplicateInSample { sample: String, id: u32 },

    #[error("no note for product {0}")]
    MissingNote(u32),

    #[error("correction for product {id}, criterion {criterion} expects {expected} but the cohort holds {found}")]
    StaleCorrection { id: u32, criterion: usize, expected: f64, found: f64 },

    #[error("weights sum to {0}, expected 1")]
    WeightSum(f64),

    #[error("capacity has no value for subset {0}")]
    CapacityIncomplete(Coalition),

    #[error("ranking identification needs exactly {expected} products, got {found}")]
    RankSampleSize { expected: usize, found: usize },

    #[error("degenerate equality constraint (z'(X'X)^-1 z = {0:e})")]
    DegenerateConstraint(f64),

    #[error("OWA and MAUT predictions coincide, the mixing factor is undefined")]
    DegenerateMixing,

    #[error("need at least {needed} values, got {found}")]
    TooFew { needed: usize, found: usize },

    #[error("design has {columns} columns but the sample holds only {rows} products")]
    Underdetermined { rows: usize, columns: usize },

    #[error("exchange did not terminate within {0} swaps")]
    NonConvergence(usize),

    #[error("unknown noise variance label {0:?}")]
    VarianceLabel(String),

    #[error("negative noise variance {0}")]
    NegativeVariance(f64),
}

impl Error {
    /// True for failures of the numerics (singular systems, degenerate constraints,
    /// non-convergence) as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::DegenerateConstraint(_)
                | Error::DegenerateMixing
                | Error::NonConvergence(_)
        )
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
