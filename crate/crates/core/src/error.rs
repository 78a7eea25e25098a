use thiserror::Error;

/// Errors raised by grid construction and every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("grid alignment: {0}")]
    Alignment(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular weight at cell {cell}: {detail}")]
    SingularWeight { cell: usize, detail: String },

    #[error("region does not meet the grid")]
    EmptyRegion,

    #[error("cube family is not pairwise disjoint (cubes {0} and {1} overlap)")]
    Overlap(usize, usize),

    #[error("kernel scale t={t} is below the cell width h={h}")]
    UnderResolvedKernel { t: f64, h: f64 },

    #[error("resolution limit in shell {shell}: budget {budget:.3e} not met, error {achieved:.3e} at smallest resolvable t={smallest_t:.3e}")]
    ResolutionLimit {
        shell: usize,
        smallest_t: f64,
        budget: f64,
        achieved: f64,
    },

    #[error("degenerate direction sample: {0}")]
    DegenerateSample(String),

    #[error("zero denominator: {0}")]
    ZeroDenominator(String),
}

pub type Result<T> = std::result::Result<T, Error>;
