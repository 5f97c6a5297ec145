use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("empty range: {0}")]
    EmptyRange(String),

    #[error("limit {requested} exceeds the configured ceiling {ceiling}")]
    Capacity { requested: u64, ceiling: u64 },

    #[error("{what} needs coverage up to {requested}, table only reaches {available}")]
    Coverage {
        what: &'static str,
        requested: u64,
        available: u64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("local Euler factor at p={p} is within 1e-12 of zero")]
    SingularFactor { p: u64 },

    #[error("unknown function spec `{name}`; valid specs: {valid}")]
    UnknownFunction { name: String, valid: &'static str },

    #[error("malformed parameters: {0}")]
    MalformedParams(String),

    #[error("class violation at p={p}, k={k}: {detail}")]
    ClassViolation { p: u64, k: u32, detail: String },

    #[error("block construction overflows log form after {max_blocks} blocks")]
    BlockOverflow { max_blocks: usize },

    #[error("l2 budget exceeded: sum a_j^2 = {sum} > {budget}")]
    Budget { sum: f64, budget: f64 },

    #[error("io: {0}")]
    Io(String),
}

impl LabError {
    /// Machine-readable kind used by the CLI's `error:<kind>:` prefix.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::EmptyRange(_) => "empty-range",
            LabError::Capacity { .. } | LabError::BlockOverflow { .. } => "capacity",
            LabError::Coverage { .. } => "coverage",
            LabError::Domain(_) => "domain",
            LabError::SingularFactor { .. } => "singular-factor",
            LabError::UnknownFunction { .. } => "unknown-function",
            LabError::MalformedParams(_) => "malformed-params",
            LabError::ClassViolation { .. } => "class-violation",
            LabError::Budget { .. } => "budget",
            LabError::Io(_) => "io",
        }
    }

    pub(crate) fn coverage(what: &'static str, requested: u64, available: u64) -> Self {
        LabError::Coverage {
            what,
            requested,
            available,
        }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
