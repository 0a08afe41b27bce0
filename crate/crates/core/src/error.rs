use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("model is degenerate: {0}")]
    DegenerateModel(String),
    #[error("step set violates hypothesis (H): {0}")]
    HypothesisViolated(String),
    #[error("steps leave the unit square after the change of variables: {0}")]
    StepsTooLarge(String),
    #[error("start point lies outside the domain")]
    StartOutsideDomain,
    #[error("division by a series with no invertible leading coefficient")]
    DivisionByZeroSeries,
    #[error("leading coefficient {0} has no exact square root")]
    NonSquareLeading(String),
    #[error("fixed-point iteration did not stabilise after {0} rounds")]
    NoConvergence(usize),
    #[error("series truncation insufficient: {0}")]
    TruncationInsufficient(String),
    #[error("branch points do not match the expected layout: {0}")]
    ClassificationFailure(String),
    #[error("leading coefficient of the kernel vanishes at this point")]
    LeadingCoefficientVanishes,
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("point is on the contour (distance {0:e})")]
    OnCurve(f64),
    #[error("phase step {0:.3} rad exceeds pi/2; refine the mesh")]
    PhaseJumpTooLarge(f64),
    #[error("the contour is unbounded")]
    UnboundedContour,
    #[error("quadrature did not converge: estimate {0:e}")]
    QuadratureNotConverged(f64),
    #[error("evaluation at the pole of the gluing function")]
    EvaluationAtPole,
    #[error("the gluing function already has its pole at y2")]
    PoleAlreadyAtY2,
    #[error("elliptic inversion left the fundamental domain")]
    InversionOutsideFundamentalDomain,
    #[error("an image of a branch point is infinite")]
    BranchPointImageInfinite,
    #[error("square-root branch jumps along the contour (step {0:.3} rad)")]
    BranchDiscontinuity(f64),
    #[error("index mismatch: expected {expected}, found {found}")]
    IndexMismatch { expected: i64, found: i64 },
    #[error("truncation tail bound {0:e} exceeds tolerance")]
    TruncationTailTooLarge(f64),
    #[error("point is within one mesh cell of the contour")]
    PointTooCloseToContour,
    #[error("kernel vanishes at the evaluation point")]
    KernelZero,
    #[error("evaluation point outside the convergence domain: {0}")]
    ConvergenceDomainViolated(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
