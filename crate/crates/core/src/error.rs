use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("IRS sizing failed: {0}")]
    Sizing(String),

    #[error("random placement terminated after {0} iterations without a feasible support")]
    Terminated(usize),

    #[error("constraint violated: {0}")]
    Validation(String),

    #[error("config: {0}")]
    Config(String),

    #[error("trial {trial} (strategy {strategy}, sigma {sigma}): {source}")]
    Trial {
        trial: usize,
        strategy: String,
        sigma: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Infeasible(_) => "infeasible",
            Error::Sizing(_) => "sizing-failure",
            Error::Terminated(_) => "terminated",
            Error::Validation(_) => "validation",
            Error::Config(_) => "config",
            Error::Trial { source, .. } => source.kind(),
            Error::Csv(_) => "csv",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
