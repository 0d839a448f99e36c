use std::fmt;

/// Errors produced by every stage of the discovery pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("date {0} lies before the 1582-10-15 calendar reform")]
    UnsupportedEra(OldStyleDisplay),

    #[error("degenerate range: {0}")]
    DegenerateRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training diverged at epoch {epoch} (loss is not finite)")]
    Divergence { epoch: usize },

    #[error("finite-difference stencil [{lo}, {hi}] leaves the unit interval")]
    OutOfRange { lo: f64, hi: f64 },

    #[error("unbound variable x{index} (only {arity} bound)")]
    UnboundVariable { index: usize, arity: usize },

    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("expression is not a conic of the form A/(B + C*cos(x + D)): {0}")]
    NotAConic(String),

    #[error("eccentricity {0} does not describe an ellipse")]
    NotAnEllipse(f64),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("model checkpoint: {0}")]
    Checkpoint(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// `YYYY/MM/DD` rendering carried inside [`Error::UnsupportedEra`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OldStyleDisplay {
    pub year: i32,
    pub month: u32,
    pub day: u32,
}

impl fmt::Display for OldStyleDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}/{:02}/{:02}", self.year, self.month, self.day)
    }
}

impl Error {
    /// Exit-code class used by the command-line driver: 2 for data problems,
    /// 3 for numeric failures.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Stage { source, .. } => source.is_numeric(),
            e => matches!(
                e,
                Error::Divergence { .. } | Error::Numeric(_) | Error::NotAnEllipse(_)
            ),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
