//! Error types shared across the library.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes the library reports.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller passed inconsistent dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Caller passed invalid arguments (bad parameter interval, unknown name).
    #[error("invalid usage: {0}")]
    Usage(String),

    /// A point left (or never was in) the barrier's domain.
    #[error("outside barrier domain: {0}")]
    Domain(String),

    /// A numerical operation failed (non-positive-definite metric, NaN).
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// A metric solve hit a numerically singular system.
    #[error(
        "metric solve failed: matrix numerically singular \
         (condition estimate {cond_estimate:.3e})"
    )]
    SingularMetric {
        /// Cheap condition-number estimate from the factor diagonal.
        cond_estimate: f64,
    },

    /// The iterative subproblem solver stalled before its certificate target.
    #[error(
        "subsolver stalled: best certificate residual {best_delta:.3e} \
         (target {target:.3e}) after {iterations} iterations"
    )]
    SubsolverStall {
        /// Best certified accuracy achieved before the cap.
        best_delta: f64,
        /// Accuracy the caller asked for.
        target: f64,
        /// Iterations consumed.
        iterations: usize,
    },

    /// An outer iteration budget was exhausted.
    #[error("iteration budget exceeded in {phase}: {iterations} iterations")]
    Budget {
        /// Which loop ran out ("phase 1", "phase 2", ...).
        phase: String,
        /// Iterations consumed.
        iterations: usize,
    },

    /// Initialization failed (e.g. no strictly feasible start found).
    #[error("initialization failed: {0}")]
    Init(String),

    /// Operation requested on an unsupported combination of oracle types.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed problem/solution/trace file.
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Process exit code the CLI maps this error to.
    ///
    /// 1 = usage, 2 = budget exceeded, 3 = domain/numeric trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Dimension(_) | Error::Format(_) => 1,
            Error::Budget { .. } => 2,
            Error::Domain(_)
            | Error::Numeric(_)
            | Error::SingularMetric { .. }
            | Error::SubsolverStall { .. }
            | Error::Init(_)
            | Error::Unsupported(_)
            | Error::Io(_) => 3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_match_contract() {
        assert_eq!(Error::Usage("x".into()).exit_code(), 1);
        assert_eq!(
            Error::Budget {
                phase: "phase 2".into(),
                iterations: 7
            }
            .exit_code(),
            2
        );
        assert_eq!(Error::Domain("x".into()).exit_code(), 3);
        assert_eq!(
            Error::SingularMetric {
                cond_estimate: 1e16
            }
            .exit_code(),
            3
        );
    }

    #[test]
    fn messages_carry_payload() {
        let e = Error::SubsolverStall {
            best_delta: 1.5e-3,
            target: 1e-6,
            iterations: 600,
        };
        let msg = e.to_string();
        assert!(msg.contains("1.500e-3"));
        assert!(msg.contains("600"));
    }
}
