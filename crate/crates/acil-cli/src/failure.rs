//! Failure taxonomy for the harness, mapped onto the process exit codes CI
//! gates on: 2 for bad inputs, 3 for numerical breakdown, 4 for an
//! equivalence verification that did not pass.

use std::fmt;

pub type Result<T> = std::result::Result<T, Failure>;

#[derive(Debug)]
pub enum Failure {
    /// Bad config, arguments, files, or shapes.
    Validation(String),
    /// The linear algebra gave up (ill-conditioned factorization).
    Numerical(String),
    /// The recursive state disagreed with the joint re-solve.
    Verification(String),
}

impl Failure {
    pub fn validation(msg: impl Into<String>) -> Failure {
        Failure::Validation(msg.into())
    }

    pub fn verification(msg: impl Into<String>) -> Failure {
        Failure::Verification(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Verification(_) => 4,
        }
    }

    /// Prefix the message (e.g. with the phase that failed), keeping the
    /// failure class.
    pub fn context(self, prefix: &str) -> Failure {
        match self {
            Failure::Validation(m) => Failure::Validation(format!("{prefix}: {m}")),
            Failure::Numerical(m) => Failure::Numerical(format!("{prefix}: {m}")),
            Failure::Verification(m) => Failure::Verification(format!("{prefix}: {m}")),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) | Failure::Verification(m) => m,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

impl From<acil::Error> for Failure {
    fn from(e: acil::Error) -> Failure {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}
