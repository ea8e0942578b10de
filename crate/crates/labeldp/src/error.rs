//! Error type shared across the crate.

use crate::additive::NoiseKind;

/// Everything that can go wrong in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Density nodes must be strictly increasing (degenerate bins included).
    #[error("nodes must be strictly increasing (violation at index {index})")]
    NonMonotoneNodes { index: usize },
    /// A density needs at least two nodes (one bin).
    #[error("a step density needs at least 2 nodes, got {got}")]
    TooFewNodes { got: usize },
    /// Node/value list lengths are inconsistent.
    #[error("expected {expected} values for {nodes} nodes, got {got}")]
    BadValueCount {
        nodes: usize,
        expected: usize,
        got: usize,
    },
    /// Heights and bin masses must be non-negative.
    #[error("negative value {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },
    /// A density cannot be normalized from all-zero mass.
    #[error("total mass must be positive")]
    ZeroTotalMass,
    /// A non-finite number showed up where a finite one is required.
    #[error("{what} must be finite")]
    NonFiniteValue { what: &'static str },
    /// Integration bounds or interval endpoints out of order.
    #[error("bounds out of order: {lo} > {hi}")]
    ReversedBounds { lo: f64, hi: f64 },
    /// The neighborhood half-width must be positive.
    #[error("zeta must be positive, got {zeta}")]
    NonPositiveZeta { zeta: f64 },
    /// Privacy budgets for the randomizer are non-negative.
    #[error("epsilon must be non-negative, got {epsilon}")]
    NegativeEpsilon { epsilon: f64 },
    /// Additive-noise budgets must be strictly positive.
    #[error("epsilon must be positive, got {epsilon}")]
    NonPositiveEpsilon { epsilon: f64 },
    /// Critical points are undefined when the two bin heights coincide.
    #[error("bins {i} and {j} have equal heights; critical points are undefined")]
    EqualHeights { i: usize, j: usize },
    /// The queried label lies outside the randomization interval.
    #[error("y = {y} lies outside [{a1}, {a2}]")]
    OutOfInterval { y: f64, a1: f64, a2: f64 },
    /// An operation was handed a noise spec of the wrong kind.
    #[error("expected {expected:?} noise, got {got:?}")]
    WrongKind { expected: NoiseKind, got: NoiseKind },
    /// Gaussian noise requires delta in (0, 1).
    #[error("delta must be in (0, 1) for Gaussian noise, got {delta}")]
    InvalidDelta { delta: f64 },
    /// Noise sensitivity is the public label range; it must be positive.
    #[error("sensitivity must be positive, got {sensitivity}")]
    NonPositiveSensitivity { sensitivity: f64 },
    /// Fixed histogram bin width must be positive.
    #[error("sigma must be positive, got {sigma}")]
    NonPositiveSigma { sigma: f64 },
    /// The requested histogram would have an absurd number of bins.
    #[error("histogram would need {bins} bins (cap {cap}); widen sigma")]
    TooManyBins { bins: u64, cap: u64 },
    /// The stage budget handed to an operation disagrees with its noise spec.
    #[error("stage budget {expected} disagrees with noise spec epsilon {got}")]
    BudgetMismatch { expected: f64, got: f64 },
    /// A privacy budget split must have two positive parts.
    #[error("invalid split: epsilon_total = {epsilon_total}, epsilon1 = {epsilon1}")]
    InvalidSplit { epsilon_total: f64, epsilon1: f64 },
    /// Paired slices/datasets must have equal length.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    /// Operations over datasets need at least one row.
    #[error("dataset is empty")]
    EmptyDataset,
    /// The empirical audit needs enough samples per histogram bin.
    #[error("need at least {needed} samples for {bins} bins, got {got}")]
    InsufficientSamples { needed: u64, bins: usize, got: u64 },
    /// The named label column is missing from the CSV header.
    #[error("label column {name:?} not found in header")]
    MissingLabelColumn { name: String },
    /// A label failed to parse as a finite number.
    #[error("row {row}: label {value:?} is not a finite number")]
    BadLabel { row: usize, value: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
