use alloc::string::String;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("not unimodal: lambda = {lambda} exceeds 1 + t/theta = {bound}")]
    NotUnimodal { lambda: f64, bound: f64 },
    #[error("quadrature did not reach tolerance: value {value}, error estimate {error}")]
    Quadrature { value: f64, error: f64 },
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("branch cut: {0}")]
    Branch(String),
    #[error("coefficient pole at k = {k}")]
    Pole { k: usize },
    #[error("divergent: {0}")]
    Divergent(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("polynomial is not real-rooted: {0}")]
    NotRealRooted(String),
}

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::Domain(_) => "domain",
            Error::NotUnimodal { .. } => "not_unimodal",
            Error::Quadrature { .. } => "quadrature",
            Error::NonConvergence(_) => "non_convergence",
            Error::Branch(_) => "branch",
            Error::Pole { .. } => "pole",
            Error::Divergent(_) => "divergent",
            Error::Inconsistent(_) => "inconsistent",
            Error::NotRealRooted(_) => "not_real_rooted",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
