use thiserror::Error;

/// Errors raised by the core algorithms.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is outside the supported range 1..=4")]
    UnsupportedDim(usize),
    #[error("expected {expected} entries for a {dim}x{dim} matrix, got {got}")]
    BadEntryCount { dim: usize, expected: usize, got: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not unimodular (|det| = {0})")]
    NotUnimodular(i64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("invalid shape: {0}")]
    BadShape(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unknown seed bank `{0}`")]
    UnknownSeed(String),
    #[error("seed `{name}` is not available for dilation {dilation}")]
    UnsupportedDilation { name: String, dilation: i64 },
    #[error("invariant factor {0} has no seed bank")]
    UnsupportedFactor(i64),
    #[error("bank is not a tight frame (worst violation {0:e})")]
    NotCertified(f64),
    #[error("bank matrices generate more than one lattice")]
    MixedLattice,
    #[error("band labels invalid: a bank needs at least one low-pass filter, listed before every high-pass filter")]
    BandOrder,
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("pyramid does not match plan: {0}")]
    PyramidMismatch(String),
    #[error("mask is not low-pass (symbol at 0 is {0})")]
    NotLowPass(String),
    #[error("node {0} is not a leaf of the plan")]
    NotALeaf(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
