use thiserror::Error;

/// Errors raised by lattice construction, codebook enumeration, exact
/// information measures and the channel simulator.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("generator matrix has rank {rank} over GF(p), expected full column rank {k}")]
    RankDeficientG { rank: usize, k: usize },
    #[error("transform has determinant {det}, expected +1 or -1")]
    NotUnimodular { det: i128 },
    #[error("lattice scale must be strictly positive")]
    NonPositiveScale,
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(&'static str),
    #[error("matrix entry {entry} out of range [0, {p})")]
    EntryOutOfRange { entry: u64, p: u64 },
    #[error("enumeration needs {needed} items, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("codebook is degenerate (all points zero)")]
    DegenerateCodebook,
    #[error("codebook is empty")]
    EmptyCodebook,
    #[error("{bins} bins do not evenly divide a codebook of size {size}")]
    NonDivisibleBins { size: usize, bins: usize },
    #[error("layer {layer} is not contained in the shared fine lattice")]
    LayerNotNested { layer: usize },
    #[error("distribution support is not contained in the reference set")]
    SupportMismatch,
    #[error("cross gain a = 1 is excluded")]
    UnityGain,
    #[error("very strong interference condition fails at decoding stage {stage}")]
    StageConditionViolated { stage: usize },
    #[error("no Construction-A lattice codebook has size {0}")]
    NoMatchedLattice(usize),
    #[error("invalid parameter `{0}`")]
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
