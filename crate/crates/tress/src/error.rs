//! Error type shared across the crate.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed Newick input, with a short description of what went wrong.
    Newick(String),
    /// A leaf label appeared more than once in one tree.
    DuplicateTaxon(String),
    /// Trees need at least three leaves to be meaningful unrooted.
    TooFewTaxa(usize),
    /// Operands reference different taxon sets.
    TaxonMismatch,
    /// An operation that needs samples was handed an empty chain.
    EmptyChain,
    /// A scalar series is shorter than the estimator requires.
    SeriesTooShort { need: usize, got: usize },
    /// A scalar series is constant, so correlation structure is undefined.
    ConstantSeries,
    /// An index subset is smaller than the estimator requires.
    SubsetTooSmall { need: usize, got: usize },
    /// Consensus threshold below 0.5 could retain incompatible splits.
    InvalidThreshold(f64),
    /// Confidence level outside (0, 1).
    InvalidLevel(f64),
    /// The chain has no log-density trace but one was required.
    MissingLogDensity,
    /// An operation requires fully resolved (binary) topologies.
    NotBinary,
    /// A categorical tree distribution ended up with empty support.
    EmptySupport,
    /// Anything else that makes a configuration unusable.
    InvalidArgument(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Newick(msg) => write!(f, "newick parse error: {msg}"),
            Error::DuplicateTaxon(name) => write!(f, "duplicate taxon label: {name:?}"),
            Error::TooFewTaxa(n) => write!(f, "need at least 3 taxa, got {n}"),
            Error::TaxonMismatch => write!(f, "operands use different taxon sets"),
            Error::EmptyChain => write!(f, "chain contains no samples"),
            Error::SeriesTooShort { need, got } => {
                write!(f, "series too short: need {need} samples, got {got}")
            }
            Error::ConstantSeries => write!(f, "series is constant"),
            Error::SubsetTooSmall { need, got } => {
                write!(f, "index subset too small: need {need}, got {got}")
            }
            Error::InvalidThreshold(t) => {
                write!(f, "consensus threshold must be >= 0.5, got {t}")
            }
            Error::InvalidLevel(l) => {
                write!(f, "confidence level must lie in (0, 1), got {l}")
            }
            Error::MissingLogDensity => write!(f, "chain has no log-density trace"),
            Error::NotBinary => write!(f, "topology is not fully resolved"),
            Error::EmptySupport => write!(f, "distribution support is empty"),
            Error::InvalidArgument(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for Error {}
