use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector clock length mismatch: {left} vs {right}")]
    ClockLength { left: usize, right: usize },

    #[error("process {0} is out of range for a run of {1} processes")]
    ProcessOutOfRange(usize, usize),

    #[error("states on the same process are never concurrent (process {0})")]
    SameProcess(usize),

    #[error("trace has a gap on process {process}: expected index {expected}, found {found}")]
    TraceGap { process: usize, expected: u32, found: u32 },

    #[error("unknown local predicate `{0}`")]
    UnknownPredicate(String),

    #[error("property expects {expected} local predicates, run has {found} processes")]
    PropertyArity { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("lattice exceeded node budget of {0}")]
    BudgetExceeded(usize),

    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
