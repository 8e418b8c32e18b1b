use thiserror::Error;

/// Errors shared across the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("empty box: hi must exceed lo on every axis")]
    EmptyBox,

    #[error("non-finite field value near the box edge")]
    NonFiniteValue,

    #[error("field does not have constant exterior derivative (max deviation {deviation:.3e})")]
    NonConstantCurvature { deviation: f64 },

    #[error("pair cutoff h_min={h_min} too small for grid spacing {spacing}")]
    CutoffTooSmall { h_min: f64, spacing: f64 },

    #[error("function support touches the grid edge; truncation would be unquantified")]
    SupportTouchesEdge,

    #[error("half-space grid needs at least two t nodes")]
    SingleTNode,

    #[error("grid does not cover the extension support: T={t_max} < a={a}")]
    SlabTooShallow { t_max: f64, a: f64 },

    #[error("trace looks discontinuous: the two smallest t rows differ by {rel:.1}%")]
    DiscontinuousTrace { rel: f64 },

    #[error("points are antipodal: no unique minimizing geodesic")]
    AntipodalPoints,

    #[error("point outside the chart domain")]
    ChartDomain,

    #[error("measures disagree on moment {moment} ({lhs} vs {rhs}); matching required below order {required}")]
    MomentMismatch {
        moment: usize,
        lhs: f64,
        rhs: f64,
        required: usize,
    },

    #[error("need at least {required} positive data points, got {got}")]
    TooFewPoints { required: usize, got: usize },

    #[error("log-log fit requires positive values, found {value}")]
    NonPositiveValue { value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
