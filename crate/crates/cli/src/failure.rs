use std::fmt;
use std::process::ExitCode;

/// A failure with its process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flag values or combinations the parser could not catch.
    Usage(String),
    /// A method that does not support the requested model.
    Unsupported(String),
    /// A user-supplied ω that does not certify.
    Certification(String),
    /// No finite sample size meets the target.
    Infeasible(String),
    Io(std::io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Usage(_) => 2,
            Failure::Unsupported(_) => 3,
            Failure::Certification(_) => 4,
            Failure::Infeasible(_) => 5,
            Failure::Io(_) => 1,
        })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Unsupported(m) => write!(f, "unsupported: {m}"),
            Failure::Certification(m) => write!(f, "certification failed: {m}"),
            Failure::Infeasible(m) => write!(f, "infeasible: {m}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ordsel::Error> for Failure {
    fn from(e: ordsel::Error) -> Self {
        match e {
            ordsel::Error::UnsupportedFamily { .. } => Failure::Unsupported(e.to_string()),
            ordsel::Error::DegeneratePolynomial => Failure::Infeasible(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}
