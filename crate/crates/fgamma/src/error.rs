use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] fgamma_core::Error),
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not positive semi-definite (eigenvalue {0})")]
    NotPsd(f64),
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(e) => e.kind(),
            Error::Usage(_) => "usage",
            Error::DimensionMismatch(..) => "dimension_mismatch",
            Error::NotPsd(_) => "not_psd",
            Error::Eigen(_) => "eigensolver",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    /// Bad input rather than a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Usage(_)
                | Error::Core(fgamma_core::Error::InvalidParams(_))
                | Error::Core(fgamma_core::Error::Domain(_))
                | Error::Core(fgamma_core::Error::Pole { .. })
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
