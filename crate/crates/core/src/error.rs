use thiserror::Error;

use crate::solver::SolveReport;

pub type Result<T, E = RibbonError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RibbonError {
    /// Argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Curvature numerically zero; the Frenet frame and `eta` are undefined.
    #[error("inflection point at t = {t} (kappa = {kappa:e})")]
    InflectionPoint { t: f64, kappa: f64 },

    /// `1 + v eta'` vanishes: rulings cross inside the strip.
    #[error("edge of regression at t = {t}, v = {v}")]
    EdgeOfRegression { t: f64, v: f64 },

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    /// A finite-difference probe hit an infinite objective.
    #[error("objective is infinite when probing coefficient {coordinate}")]
    BlockedGradient { coordinate: usize },

    #[error("line search failed to decrease the objective after {attempts} step reductions")]
    NoDescent {
        attempts: usize,
        report: Box<SolveReport>,
    },

    #[error("curve rejected: {0}")]
    Rejected(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl RibbonError {
    pub fn domain(msg: impl Into<String>) -> Self {
        RibbonError::Domain(msg.into())
    }

    /// Short machine-readable name used in error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            RibbonError::Domain(_) => "Domain",
            RibbonError::InflectionPoint { .. } => "InflectionPoint",
            RibbonError::EdgeOfRegression { .. } => "EdgeOfRegression",
            RibbonError::DegenerateCurve(_) => "DegenerateCurve",
            RibbonError::InvalidCurve(_) => "InvalidCurve",
            RibbonError::BlockedGradient { .. } => "BlockedGradient",
            RibbonError::NoDescent { .. } => "NoDescent",
            RibbonError::Rejected(_) => "Rejected",
            RibbonError::Io { .. } => "Io",
            RibbonError::Json(_) => "Json",
        }
    }

    /// Parameter location attached to the error, if any.
    pub fn location(&self) -> Option<serde_json::Value> {
        match self {
            RibbonError::InflectionPoint { t, .. } => Some(serde_json::json!({ "t": t })),
            RibbonError::EdgeOfRegression { t, v } => Some(serde_json::json!({ "t": t, "v": v })),
            RibbonError::BlockedGradient { coordinate } => {
                Some(serde_json::json!({ "coordinate": coordinate }))
            }
            RibbonError::Io { path, .. } => Some(serde_json::json!({ "path": path })),
            _ => None,
        }
    }

    /// Whether the error describes mathematical infeasibility rather than
    /// bad input.
    pub fn is_mathematical(&self) -> bool {
        matches!(
            self,
            RibbonError::InflectionPoint { .. }
                | RibbonError::EdgeOfRegression { .. }
                | RibbonError::NoDescent { .. }
                | RibbonError::DegenerateCurve(_)
                | RibbonError::BlockedGradient { .. }
        )
    }
}
