use std::fmt;

/// Why a run stopped, and the exit status it maps to.
#[derive(Debug)]
pub enum Failure {
    Solver(cmph::Error),
    /// Missing or malformed input.
    Usage(String),
    /// The exact solution or the oracle comparison failed a check.
    Validation(String),
    Io(anyhow::Error),
}

impl Failure {
    pub fn io(err: std::io::Error, what: String) -> Self {
        Failure::Io(anyhow::Error::new(err).context(what))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Solver(e) => match e {
                cmph::Error::Domain(_) | cmph::Error::UnitMismatch(..) => 2,
                cmph::Error::NoConvergence(_) | cmph::Error::QuadratureFailure { .. } => 3,
                cmph::Error::BracketFailure(_) => 4,
            },
            Failure::Usage(_) => 2,
            Failure::Validation(_) => 5,
            Failure::Io(_) => 10,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Solver(e) => write!(f, "{e}"),
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Validation(m) => write!(f, "validation failed: {m}"),
            Failure::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<cmph::Error> for Failure {
    fn from(e: cmph::Error) -> Self {
        Failure::Solver(e)
    }
}
