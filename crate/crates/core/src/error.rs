use std::path::PathBuf;

/// Errors shared across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("graph size {size} out of range for {kind}: {reason}")]
    GraphSize {
        kind: &'static str,
        size: usize,
        reason: &'static str,
    },

    #[error("vector length {got} does not match link count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("bit vector is not an independent set: links {0} and {1} conflict")]
    NotIndependent(usize, usize),

    #[error("graph has {n} links, above the enumeration cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("invalid edge ({0}, {1}): {2}")]
    InvalidEdge(usize, usize, &'static str),

    #[error("matrix is singular (pivot {pivot:.3e} at column {col})")]
    SingularMatrix { col: usize, pivot: f64 },

    #[error("basis column {0} is empty; the all-idle schedule cannot enter a basis")]
    EmptyBasisColumn(usize),

    #[error("basis solve produced an infeasible vertex: {0}")]
    InfeasibleVertex(String),

    #[error("column swap at index {0} would make the basis singular")]
    PivotSingular(usize),

    #[error("line search found no binding constraint; basis or vertex state is inconsistent")]
    UnboundedStep,

    #[error("iteration cap of {cap} exceeded (gap still {gap:.6} after {cap} pivots)")]
    IterationCap { cap: usize, gap: f64 },

    #[error("linear program did not solve: {0}")]
    LpFailure(String),

    #[error("rate vector entry {value} at link {link} outside [0, 1]")]
    InvalidRate { link: usize, value: f64 },

    #[error("negative rate {value} at link {link}")]
    NegativeRate { link: usize, value: f64 },

    #[error("activation probability {0} outside (0, 1]")]
    InvalidActivationProb(f64),

    #[error("ledger has no elapsed slots")]
    EmptyLedger,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("failed to parse graph file at line {line}: {reason}")]
    ParseGraph { line: usize, reason: String },

    #[error("failed to parse trace: {0}")]
    ParseTrace(String),

    #[error("traces have different horizons: {0} vs {1}")]
    MismatchedHorizons(usize, usize),

    #[error("cannot write to {path}: {source}")]
    OutputPath {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
