use thiserror::Error;

use crate::compiler::CompileStats;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("formula is constant")]
    ConstantFormula,

    #[error("too many variables for exhaustive enumeration: {vars} > cap {cap}")]
    TooLarge { vars: usize, cap: usize },

    #[error("domain size must be at least 1")]
    EmptyDomain,

    #[error("variable {0} is not bound by the assignment")]
    UnboundVariable(String),

    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("node budget of {budget} exhausted")]
    BudgetExhausted {
        budget: usize,
        stats: Option<Box<CompileStats>>,
    },

    #[error("restriction is not transversal-free: {0}")]
    NotTransversalFree(String),

    #[error("combinator does not depend on argument {0}")]
    NotFullyDependent(usize),

    #[error("diagram does not compute the expected function: {0}")]
    WrongFunction(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("combinator is not monotone")]
    NotMonotone,

    #[error("unsafe query (mu(0,1) = {0}): weighted model counting is #P-hard")]
    UnsafeQuery(String),

    #[error("internal safety violation: lattice element {0} covers every index")]
    InternalSafetyViolation(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Stable identifier used by the CLI when reporting domain errors.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidAssignment(_) => "InvalidAssignment",
            Error::ConstantFormula => "ConstantFormula",
            Error::TooLarge { .. } => "TooLarge",
            Error::EmptyDomain => "EmptyDomain",
            Error::UnboundVariable(_) => "UnboundVariable",
            Error::InvalidDiagram(_) => "InvalidDiagram",
            Error::Unsupported(_) => "Unsupported",
            Error::BudgetExhausted { .. } => "BudgetExhausted",
            Error::NotTransversalFree(_) => "NotTransversalFree",
            Error::NotFullyDependent(_) => "NotFullyDependent",
            Error::WrongFunction(_) => "WrongFunction",
            Error::Refused(_) => "Refused",
            Error::NotMonotone => "NotMonotone",
            Error::UnsafeQuery(_) => "UnsafeQuery",
            Error::InternalSafetyViolation(_) => "InternalSafetyViolation",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
        }
    }
}
