use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function it was passed to.
    #[error("{func}: argument out of domain ({detail})")]
    Domain { func: &'static str, detail: String },

    /// The AF-path closed form needs integer fading shapes.
    #[error(
        "closed-form AF-path CDF requires integer shapes, got m1 = {m1}, m2 = {m2}; \
         use af_path_cdf_quadrature instead"
    )]
    ClosedFormUnavailable { m1: f64, m2: f64 },

    #[error("quadrature did not converge: estimated error {estimate:e} exceeds tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("diversity fit needs at least 3 points in [{lo}, {hi}] dB, found {found}")]
    InsufficientPoints { lo: f64, hi: f64, found: usize },

    #[error("diversity fit: outage is zero at {snr_db} dB")]
    ZeroOutage { snr_db: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("scenario file: {0}")]
    ScenarioParse(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    /// True for failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature { .. } | Error::ZeroOutage { .. })
    }
}
