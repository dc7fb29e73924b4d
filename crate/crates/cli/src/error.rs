//! One error type for everything the front end can reject.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown name {0:?}")]
    UnknownName(String),
    #[error("forward reference to {name:?} at line {line} (only letrec programs may refer forwards)")]
    ForwardReference { name: String, line: usize },
    #[error("{0:?} is declared twice (shadowing is not allowed)")]
    Shadowed(String),
    #[error("arity mismatch: {op:?} expects {expected} arguments, found {found}")]
    ArityMismatch {
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown operation {0:?}")]
    UnknownOp(String),
    #[error("sort mismatch at {place}: expected {expected}, found {found}")]
    SortMismatch {
        place: String,
        expected: String,
        found: String,
    },
    #[error("cannot infer a sort for {0:?}; annotate it")]
    CannotInferSort(String),
    #[error("no signature: pass --sig FILE or include a signature block")]
    MissingSignature,
    #[error("file has no {0} section")]
    MissingSection(&'static str),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Signature(#[from] tg_core::SignatureError),
    #[error("{0}")]
    Graph(#[from] tg_core::GraphError),
    #[error("{0}")]
    Tree(#[from] tg_core::TreeError),
    #[error("{0}")]
    Coalgebra(#[from] tg_core::CoalgebraError),
    #[error("{0}")]
    Cospan(#[from] tg_core::CospanError),
    #[error("{0}")]
    Family(#[from] tg_core::FamilyError),
    #[error("{0}")]
    Solve(#[from] tg_core::SolveError),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        CliError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }
}
