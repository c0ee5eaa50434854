use std::fmt;

use crate::model::Violation;

/// Errors raised by loading, validation and assessment.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("invalid dependency: {0}")]
    InvalidDependency(String),

    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("inconsistent tableau: rows {first} and {second} agree on X but demand different Y constants")]
    InconsistentTableau { first: usize, second: usize },

    #[error("relation failed validation: {}", ViolationList(.0))]
    Validation(Vec<Violation>),

    #[error("too many worlds: {} exceeds the cap of {cap}", WorldCount(*.count))]
    TooManyWorlds { count: u128, cap: u128 },

    #[error("exact assessment needs a tuple-disjoint relation; convert tuple-independent input first")]
    NotTupleDisjoint,

    #[error("undefined support: {0}")]
    UndefinedSupport(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

struct WorldCount(u128);

impl fmt::Display for WorldCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == u128::MAX {
            f.write_str(">= 2^128")
        } else {
            write!(f, "{}", self.0)
        }
    }
}
