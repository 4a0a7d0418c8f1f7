use thiserror::Error;

/// Failure modes shared by every module. Each variant names the operation
/// that produced it so messages can be traced back without a backtrace.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: domain error: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("{op}: floating-point overflow: {msg}")]
    Overflow { op: &'static str, msg: String },

    #[error("{op}: no convergence: {msg}")]
    Nonconvergence { op: &'static str, msg: String },

    #[error("{op}: tolerance {tol:e} unreachable within {cap} terms")]
    ToleranceUnreachable {
        op: &'static str,
        tol: f64,
        cap: usize,
    },

    #[error("{op}: moment table covers indices 0..={have}, index {need} required")]
    MissingMoment {
        op: &'static str,
        need: usize,
        have: usize,
    },

    #[error("{op}: measure has infinite total mass: {msg}")]
    InfiniteMass { op: &'static str, msg: String },

    #[error("{op}: invariant violated: {msg}")]
    Invariant { op: &'static str, msg: String },

    #[error("{op}: parse error: {msg}")]
    Parse { op: &'static str, msg: String },
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn parse(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Parse {
            op,
            msg: msg.into(),
        }
    }

    /// Name of the operation that failed.
    pub fn op(&self) -> &'static str {
        match self {
            Error::Domain { op, .. }
            | Error::Overflow { op, .. }
            | Error::Nonconvergence { op, .. }
            | Error::ToleranceUnreachable { op, .. }
            | Error::MissingMoment { op, .. }
            | Error::InfiniteMass { op, .. }
            | Error::Invariant { op, .. }
            | Error::Parse { op, .. } => op,
        }
    }

    /// True for failures caused by numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Overflow { .. }
                | Error::Nonconvergence { .. }
                | Error::ToleranceUnreachable { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
