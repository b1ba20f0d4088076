use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("norm not computable from finite data: {0}")]
    NotComputable(String),

    /// The torus grid is too coarse for the requested spectral parameter.
    #[error("resolution rule violated: grid N={n} but at least N={required} is needed ({reason})")]
    Resolution {
        n: usize,
        required: usize,
        reason: String,
    },

    #[error("grid exceeds node budget: {nodes} nodes > budget {budget}")]
    Budget { nodes: u128, budget: u128 },

    #[error("iteration did not converge after {iterations} steps (last estimates {last:?})")]
    NoConvergence { iterations: usize, last: [f64; 2] },

    #[error("cutoff violates grad h0 != 0: {0}")]
    CutoffViolation(String),

    #[error("time {t} exceeds the revival horizon {horizon} of the box; radius {required_radius} needed")]
    RevivalHorizon {
        t: f64,
        horizon: f64,
        required_radius: usize,
    },

    #[error("no uniform margin exists: {0}")]
    NoUniformMargin(String),

    #[error("aperture too small, increase a: {0}")]
    Aperture(String),

    #[error("Strichartz exponents undefined for d = {0} (need d >= 4)")]
    DimensionTooSmall(usize),

    #[error("continuum grid too coarse: {0}")]
    ContinuumGrid(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
