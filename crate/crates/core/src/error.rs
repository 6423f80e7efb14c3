use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("row {line} has {found} fields, expected {expected}")]
    Ragged { line: usize, expected: usize, found: usize },

    #[error("row {row} has zero norm and cannot be normalized")]
    ZeroNorm { row: usize },

    #[error("row {row} contains a non-finite value")]
    NonFinite { row: usize },

    #[error("row {row} is not unit norm (norm = {norm})")]
    NotUnitNorm { row: usize, norm: f64 },

    #[error("node {node} is isolated (zero degree)")]
    IsolatedNode { node: usize },

    #[error("graph weight ({i}, {j}) = {weight} is invalid: {reason}")]
    InvalidWeight {
        i: usize,
        j: usize,
        weight: f64,
        reason: &'static str,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("index set must be a nonempty proper subset of the active indices")]
    EmptyOrFullSubset,

    #[error("index {0} is not part of the active subset")]
    InactiveIndex(usize),

    #[error("conductance denominator is zero")]
    ZeroDenominator,

    #[error("every candidate prefix of the sweep has a zero denominator")]
    NoValidPrefix,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("iteration space is degenerate: {0}")]
    Degenerate(&'static str),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNonConvergence { sweeps: usize, off_norm: f64 },

    #[error("rule {rule} cannot be used on {mode} input")]
    IncompatibleRule { rule: &'static str, mode: &'static str },

    #[error("tree was built over an explicit graph and has no hyperplanes to query")]
    NotQueryable,

    #[error("unsupported tree format version {found} (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },

    #[error("corrupt tree payload: {0}")]
    CorruptTree(String),

    #[error("tree leaves do not cover the similarity view: {0}")]
    CoverageMismatch(String),

    #[error("brute-force cost is limited to n <= {limit} (got n = {n})")]
    GuardExceeded { n: usize, limit: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("labels are required but missing")]
    MissingLabels,

    #[error("class {0} has no entry in the anomaly table")]
    MissingClass(usize),

    #[error("degenerate hold-out specification: {0}")]
    DegenerateSpec(String),

    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
