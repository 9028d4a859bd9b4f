use thiserror::Error;

/// Errors raised by the allocation library.
///
/// The CLI maps each kind onto a fixed exit code, see [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An item or player index outside the ground set, or a precondition on
    /// set membership that does not hold.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-supplied parameter is out of range.
    #[error("usage error: {0}")]
    Usage(String),

    /// The request combines features that are not supported together.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An enumeration budget or size bound was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A linear program has no feasible point.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A constructed dual certificate failed verification.
    #[error("certificate invalid: {reason}")]
    CertificateInvalid {
        reason: String,
        /// Item labels of the violating configuration, if any.
        witness: Option<Vec<String>>,
    },

    /// A constructor precondition failed.
    #[error("construction error: {0}")]
    Construction(String),

    /// Malformed input text (values, instance files, permutation files).
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code used by the `maxmin` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Parse(_) | Error::Domain(_) | Error::Construction(_) => 2,
            Error::Unsupported(_) => 3,
            Error::Resource(_) => 4,
            Error::CertificateInvalid { .. } | Error::Infeasible(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
