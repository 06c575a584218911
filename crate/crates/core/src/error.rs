use thiserror::Error;

/// Every failure mode the toolkit reports.
///
/// Variant names are part of the external contract: the CLI serializes
/// them verbatim into its machine-readable error JSON.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability weights sum to {0}, expected 1")]
    NonStochasticWeights(f64),
    #[error("contraction ratio {0} outside (0,1)")]
    ContractionOutOfRange(f64),
    #[error("Julia parameter lambda = {0} is below 2")]
    LambdaBelowTwo(f64),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("level {level} would produce {cells} cells, cap is {cap}")]
    LevelTooLarge { level: usize, cells: u128, cap: usize },

    #[error("moment functional is not positive definite at order {0}")]
    MomentsNotPositiveDefinite(usize),
    #[error("moment route could not certify 12 digits (discrepancy {0:e})")]
    InsufficientPrecision(f64),
    #[error("{atoms} atoms cannot resolve {requested} recurrence coefficients")]
    TooFewAtoms { atoms: usize, requested: usize },
    #[error("orthonormality residual {0:e} exceeds 1e-8")]
    LostOrthogonality(f64),
    #[error("barrier sites violate sparseness ratio at index {0}")]
    SparsenessViolated(usize),
    #[error("polynomial values overflow at degree {0}")]
    Overflow(usize),
    #[error("eigensolver did not converge after {0} iterations")]
    ConvergenceFailure(usize),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("negative time {0}")]
    TimeNegative(f64),
    #[error("truncation too small: tail mass {0:e}")]
    TruncationTooSmall(f64),
    #[error("atomic resolution insufficient: t * diameter = {0}")]
    ResolutionInsufficient(f64),
    #[error("sample grid too coarse for Gaussian average at t = {0}")]
    GridTooCoarse(f64),

    #[error("linear IFS has overlapping first-level images")]
    OverlappingIfs,
    #[error("no root bracket for divergence abscissa")]
    NoRootBracket,
    #[error("cylinder cover overlaps at level {0}")]
    OverlapDetected(usize),
    #[error("scale range too narrow: {0}")]
    ScaleRangeTooNarrow(String),

    #[error("front reached truncation boundary at t = {0}")]
    FrontAtBoundary(f64),
    #[error("Ketzmerick scaling region is empty")]
    ScalingRegionEmpty,
    #[error("member {0} is not in the equivalence class")]
    NotInClass(usize),
    #[error("three-map bands overlap")]
    OverlappingBands,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable identifier of the variant, without payload.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonStochasticWeights(_) => "NonStochasticWeights",
            Error::ContractionOutOfRange(_) => "ContractionOutOfRange",
            Error::LambdaBelowTwo(_) => "LambdaBelowTwo",
            Error::InvalidMeasure(_) => "InvalidMeasure",
            Error::LevelTooLarge { .. } => "LevelTooLarge",
            Error::MomentsNotPositiveDefinite(_) => "MomentsNotPositiveDefinite",
            Error::InsufficientPrecision(_) => "InsufficientPrecision",
            Error::TooFewAtoms { .. } => "TooFewAtoms",
            Error::LostOrthogonality(_) => "LostOrthogonality",
            Error::SparsenessViolated(_) => "SparsenessViolated",
            Error::Overflow(_) => "Overflow",
            Error::ConvergenceFailure(_) => "ConvergenceFailure",
            Error::DegenerateFit(_) => "DegenerateFit",
            Error::TimeNegative(_) => "TimeNegative",
            Error::TruncationTooSmall(_) => "TruncationTooSmall",
            Error::ResolutionInsufficient(_) => "ResolutionInsufficient",
            Error::GridTooCoarse(_) => "GridTooCoarse",
            Error::OverlappingIfs => "OverlappingIFS",
            Error::NoRootBracket => "NoRootBracket",
            Error::OverlapDetected(_) => "OverlapDetected",
            Error::ScaleRangeTooNarrow(_) => "ScaleRangeTooNarrow",
            Error::FrontAtBoundary(_) => "FrontAtBoundary",
            Error::ScalingRegionEmpty => "ScalingRegionEmpty",
            Error::NotInClass(_) => "NotInClass",
            Error::OverlappingBands => "OverlappingBands",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
