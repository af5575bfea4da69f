use thiserror::Error;

/// Errors raised by the arithmetic, tree and locus computations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("residue requested for an element of negative valuation")]
    NegativeValuation,
    #[error("wild case: {0}")]
    WildCase(String),
    #[error("Hensel precondition failed: v(f(r)) <= 2 v(f'(r))")]
    HenselPreconditionFailed,
    #[error("type I point given where a type II point is required")]
    TypeIPoint,
    #[error("degree bound exceeded: degree {degree} > bound {bound}")]
    DegreeBoundExceeded { degree: usize, bound: usize },
    #[error("level bound exceeded: {leaves} leaves > bound {bound}")]
    LevelBoundExceeded { leaves: usize, bound: usize },
    #[error("residue field bound exceeded: degree {degree} > bound {bound}")]
    ResidueDegreeExceeded { degree: usize, bound: usize },
    #[error("no fixed parameter: {0}")]
    NoFixedParameter(String),
    #[error("slope probes disagree: {0}")]
    NonAffineProbe(String),
    #[error("barycenters not stabilized by level {level}: {detail}")]
    NotStabilized { level: usize, detail: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("consistency check failed: {0}")]
    CheckFailed(String),
}

impl Error {
    /// True for the errors that signal a mathematically unsupported case
    /// rather than malformed input.
    pub fn is_unsupported(&self) -> bool {
        matches!(
            self,
            Error::WildCase(_)
                | Error::NotStabilized { .. }
                | Error::PrecisionExhausted(_)
                | Error::NoFixedParameter(_)
                | Error::LevelBoundExceeded { .. }
                | Error::DegreeBoundExceeded { .. }
                | Error::ResidueDegreeExceeded { .. }
        )
    }

    /// True when a computation stopped at a size budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::LevelBoundExceeded { .. } | Error::ResidueDegreeExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::CheckFailed(msg()))
    }
}
