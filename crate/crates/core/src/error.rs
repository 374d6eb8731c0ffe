use thiserror::Error;

/// Errors raised by the simulation and estimation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("coordinate {axis} of {point:?} is zero; the kernel is singular there")]
    SingularPoint { axis: usize, point: [f64; 3] },

    #[error("term k = {k} of the series is not finite")]
    NonFinite { k: usize },

    #[error("region has infinite volume")]
    InfiniteVolume,

    #[error("ensemble was generated for alpha = {ensemble}, but the model uses alpha = {model}")]
    EnsembleMismatch { ensemble: f64, model: f64 },

    #[error("estimator is degenerate: {0}")]
    DegenerateEstimator(String),

    #[error("regression is degenerate: {0}")]
    DegenerateFit(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("path has {intervals} intervals, scale 2^-{n_max} needs at least {needed}")]
    Resolution {
        intervals: usize,
        n_max: u32,
        needed: usize,
    },

    #[error("test function support {:?} escapes the quadrature box {:?}", .0.support, .0.domain)]
    SupportEscape(Box<SupportEscape>),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Space-time boxes `(lower, upper)` reported by [`Error::SupportEscape`].
#[derive(Debug, Clone, PartialEq)]
pub struct SupportEscape {
    pub support: ([f64; 4], [f64; 4]),
    pub domain: ([f64; 4], [f64; 4]),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_domain(
    name: &'static str,
    value: f64,
    domain: &'static str,
    ok: bool,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            domain,
        })
    }
}
