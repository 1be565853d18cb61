use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max |h - h^dag| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("state is not physical: trace deviation {trace_deviation:.3e}, min eigenvalue {min_eigenvalue:.3e}")]
    NotPhysical {
        trace_deviation: f64,
        min_eigenvalue: f64,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("scenario incompatible with model: {0}")]
    IncompatibleScenario(String),

    #[error("time step {dt:.3e} exceeds the stability limit {limit:.3e}")]
    StepSize { dt: f64, limit: f64 },

    #[error("positivity breach in {subsystem} state at lambda*t = {time:.6}: min eigenvalue {min_eigenvalue:.3e}")]
    PositivityBreach {
        subsystem: &'static str,
        time: f64,
        min_eigenvalue: f64,
    },

    #[error("trace drift {deviation:.3e} at lambda*t = {time:.6}")]
    TraceDrift { time: f64, deviation: f64 },

    #[error("degenerate rate: 2(m+1)R^2 = 1 gives zeta = 0 and no finite charging time")]
    DegenerateZeta,

    #[error("predicate does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Short category label used in CLI diagnostics and exit codes.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
            Error::Dimension(_) | Error::NotHermitian { .. } | Error::NotPhysical { .. } => {
                "numerics"
            }
            Error::InvalidModel(_) | Error::IncompatibleScenario(_) | Error::StepSize { .. } => {
                "validation"
            }
            Error::PositivityBreach { .. } | Error::TraceDrift { .. } => "integration",
            Error::DegenerateZeta | Error::NoSignChange { .. } => "analysis",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
