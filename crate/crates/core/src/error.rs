use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A zero-length data link. PPP points are a.s. distinct, so this is a bug upstream.
    #[error("path-loss singularity at zero distance")]
    Singularity,

    #[error(
        "mobile placement exceeded its candidate budget: {filled}/{cells} cells filled \
         after {candidates} candidates"
    )]
    SamplingFailure {
        cells: usize,
        filled: usize,
        candidates: u64,
    },

    #[error("directed power transfer needs at least one power beacon")]
    NoBeacon,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    #[error("bound inapplicable: {0}")]
    BoundInapplicable(String),

    #[error("target outage {epsilon} is not above the interference-limited floor {floor}")]
    InfeasibleEpsilon { epsilon: f64, floor: f64 },

    #[error("series did not converge: {0}")]
    Convergence(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
