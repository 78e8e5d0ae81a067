use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failure modes shared by every module.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Depth outside `1..=MAX_DEPTH`.
    InvalidDepth(u32),
    /// An index that does not address an interval of the required kind.
    InvalidIndex { level: u32, pos: u64 },
    /// Two objects built on models of different depth.
    ModelMismatch { expected: u32, found: u32 },
    /// Vector of the wrong length.
    InvalidLength { expected: usize, found: usize },
    /// An argument outside the mathematical domain of the operation.
    Domain(&'static str),
    /// The requested exhaustive computation exceeds the size cap.
    Capacity { size: usize, cap: usize },
    /// Power iteration hit its cap; carries the best estimate so far.
    Convergence { estimate: f64, iterations: usize },
    /// A parameter choice that cannot satisfy the certificate.
    Config { reason: &'static str, required: f64 },
    /// A finite-difference stencil left the domain even after shrinking.
    Stencil,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDepth(d) => write!(f, "depth {d} outside the supported range"),
            Error::InvalidIndex { level, pos } => {
                write!(f, "invalid dyadic index (level {level}, pos {pos})")
            }
            Error::ModelMismatch { expected, found } => {
                write!(
                    f,
                    "model mismatch: expected depth {expected}, found {found}"
                )
            }
            Error::InvalidLength { expected, found } => {
                write!(f, "expected {expected} values, found {found}")
            }
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::Capacity { size, cap } => {
                write!(f, "capacity exceeded: {size} intervals, cap {cap}")
            }
            Error::Convergence {
                estimate,
                iterations,
            } => write!(
                f,
                "power iteration did not converge in {iterations} steps (best estimate {estimate})"
            ),
            Error::Config { reason, required } => {
                write!(f, "configuration error: {reason} (required {required})")
            }
            Error::Stencil => f.write_str("finite-difference stencil leaves the domain"),
        }
    }
}

impl core::error::Error for Error {}
