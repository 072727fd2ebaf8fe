use thiserror::Error;

pub type Result<T> = std::result::Result<T, FbmError>;

/// Failures raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum FbmError {
    #[error("argument {value} outside the domain of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("Bessel order {order} exceeds the supported cap {cap}")]
    OrderCap { order: i64, cap: i64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("curve is not regular: |x'(t)| = {speed:e} at t = {t}")]
    NotRegular { t: f64, speed: f64 },

    #[error("curve must be counterclockwise (signed area {area})")]
    NotCounterclockwise { area: f64 },

    #[error("origin is not inside the curve (winding number {winding})")]
    OriginNotInterior { winding: i64 },

    #[error("size error: {0}")]
    Size(String),

    #[error("tau0 = {tau0} must exceed tau_min = {tau_min}")]
    Tau0TooSmall { tau0: f64, tau_min: f64 },

    #[error("rank deficient: mu_min = {mu_min:e}, mu_max = {mu_max:e}")]
    Rank { mu_min: f64, mu_max: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("Jacobi SVD did not converge in {sweeps} sweeps")]
    Convergence { sweeps: usize },

    #[error("configuration error ({code}): {message}")]
    Config { code: &'static str, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl FbmError {
    pub(crate) fn config(code: &'static str, message: impl Into<String>) -> Self {
        FbmError::Config {
            code,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        FbmError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            FbmError::Domain { .. } => "domain",
            FbmError::OrderCap { .. } => "order_cap",
            FbmError::InvalidParameter(_) => "invalid_parameter",
            FbmError::NotRegular { .. } => "curve_not_regular",
            FbmError::NotCounterclockwise { .. } => "curve_not_counterclockwise",
            FbmError::OriginNotInterior { .. } => "origin_not_interior",
            FbmError::Size(_) => "size",
            FbmError::Tau0TooSmall { .. } => "tau0_too_small",
            FbmError::Rank { .. } => "rank_deficient",
            FbmError::Degenerate(_) => "degenerate",
            FbmError::Convergence { .. } => "svd_convergence",
            FbmError::Config { code, .. } => code,
            FbmError::Io { .. } => "io",
        }
    }

    /// True for failures caused by the user's configuration rather than by
    /// the numerics. The CLI maps these to exit code 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            FbmError::InvalidParameter(_)
                | FbmError::NotRegular { .. }
                | FbmError::NotCounterclockwise { .. }
                | FbmError::OriginNotInterior { .. }
                | FbmError::Tau0TooSmall { .. }
                | FbmError::Config { .. }
        )
    }
}
