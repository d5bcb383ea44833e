use thiserror::Error;

/// Failures raised anywhere in the direct or inverse pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not unitary: ||U*U - I|| = {residual:.3e}")]
    NotUnitary { residual: f64 },

    #[error("eigenphase clusters at {left:.9} and {right:.9} are closer than twice the merge tolerance")]
    DegenerateClustering { left: f64, right: f64 },

    #[error("eigenvalue {value:.6} is too close to 1/2 to decide the projector rank")]
    AmbiguousRank { value: f64 },

    #[error("matrix is numerically singular (smallest singular value {sigma_min:.3e})")]
    Singular { sigma_min: f64 },

    #[error("characteristic matrix is singular at zeta = {zeta}")]
    SingularAtEigenvalue { zeta: String },

    #[error("eigenvalue scan too coarse near {zeta:.12}")]
    ScanTooCoarse { zeta: f64 },

    #[error("{lambda:.12} is not an eigenvalue (no kernel below tolerance, smallest singular value {sigma_min:.3e})")]
    NotEigenvalue { lambda: f64, sigma_min: f64 },

    #[error("contour of radius {radius:.3e} around {center:.9} passes too close to a pole")]
    ContourTouchesPole { center: f64, radius: f64 },

    #[error("grid is not symmetric about the origin")]
    AsymmetricGrid,

    #[error("anti-commutation residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    AntiCommutationViolated { residual: f64, tolerance: f64 },

    #[error("no sign convention reproduces the free spectra")]
    NoConsistentSign,

    #[error("window {index} is not covered by the spectral data")]
    WindowUnderflow { index: i64 },

    #[error("not an accelerant: {0}")]
    NotAccelerant(String),

    #[error("eigenphase clusters are unstable: separation {separation:.3e} vs spread {spread:.3e}")]
    ClusterInstability { separation: f64, spread: f64 },

    #[error("T-side and S-side norming matrices disagree at lambda = {lambda:.9} (difference {difference:.3e})")]
    CrossCheckFailed { lambda: f64, difference: f64 },

    #[error("spectral data rejected: {0}")]
    DataRejected(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the failure comes from malformed input (as opposed to a numerical breakdown).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::NotUnitary { .. }
                | Error::AsymmetricGrid
                | Error::Io(_)
                | Error::Json(_)
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::NotUnitary { .. } => "NotUnitary",
            Error::DegenerateClustering { .. } => "DegenerateClustering",
            Error::AmbiguousRank { .. } => "AmbiguousRank",
            Error::Singular { .. } => "Singular",
            Error::SingularAtEigenvalue { .. } => "SingularAtEigenvalue",
            Error::ScanTooCoarse { .. } => "ScanTooCoarse",
            Error::NotEigenvalue { .. } => "NotEigenvalue",
            Error::ContourTouchesPole { .. } => "ContourTouchesPole",
            Error::AsymmetricGrid => "AsymmetricGrid",
            Error::AntiCommutationViolated { .. } => "AntiCommutationViolated",
            Error::NoConsistentSign => "NoConsistentSign",
            Error::WindowUnderflow { .. } => "WindowUnderflow",
            Error::NotAccelerant(_) => "NotAccelerant",
            Error::ClusterInstability { .. } => "ClusterInstability",
            Error::CrossCheckFailed { .. } => "CrossCheckFailed",
            Error::DataRejected(_) => "DataRejected",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
