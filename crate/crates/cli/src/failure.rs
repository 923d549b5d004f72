use std::fmt;

use dilatox::Error;

/// A failed run and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

/// Malformed or invalid configuration, unreadable input, unwritable output.
pub const EXIT_CONFIG: u8 = 2;
/// Well-formed request refused by policy (unnormalized weights without `--unchecked`).
pub const EXIT_POLICY: u8 = 3;
/// Numerical failure, or a comparison outside its thresholds.
pub const EXIT_NUMERICAL: u8 = 4;

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn policy(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_POLICY,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Quadrature { .. }
            | Error::Divergence { .. }
            | Error::CapExceeded { .. }
            | Error::HankelCutoff { .. }
            | Error::SingularLaw => EXIT_NUMERICAL,
            Error::Domain(_)
            | Error::InvalidParameter { .. }
            | Error::Contract(_)
            | Error::Grid(_)
            | Error::Io(_)
            | Error::Format(_) => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::config(format!("i/o error: {e}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
