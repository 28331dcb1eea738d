use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("ill-conditioned basis (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("{what}: budget of {budget} exceeded ({found} found so far{})",
        remainder.map(|r| format!(", remainder bound {r:.3e}")).unwrap_or_default())]
    BudgetExceeded {
        what: &'static str,
        budget: u64,
        found: usize,
        remainder: Option<f64>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no transform table attached for supergaussian p = {p}")]
    MissingTable { p: f64 },

    #[error("quadrature tolerance {requested:.3e} not reached (achieved {achieved:.3e})")]
    ToleranceUnreached { requested: f64, achieved: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
