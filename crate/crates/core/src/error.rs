use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("infeasible linkage geometry at phi = {phi} rad (radicand = {radicand:e} m^2)")]
    InfeasibleGeometry { phi: f64, radicand: f64 },

    #[error("degenerate linkage angle at phi = {phi} rad ({name} = {value})")]
    DegenerateAngle {
        phi: f64,
        name: &'static str,
        value: f64,
    },

    #[error("matrix is not Hurwitz (trace = {trace}, det = {det})")]
    NotHurwitz { trace: f64, det: f64 },

    #[error("{0} is not symmetric positive definite")]
    NotSpd(String),

    #[error("Lyapunov solve hit a singular system")]
    SolveSingular,

    #[error("matching conditions infeasible: {0}")]
    MatchingInfeasible(String),

    #[error("non-finite derivative at t = {t}")]
    NonFiniteDerivative { t: f64 },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("load-force trace needs at least 2 samples")]
    InsufficientTrace,

    #[error("trace is empty")]
    EmptyTrace,

    #[error("unknown trace column `{0}`")]
    UnknownColumn(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("bad csv {path} (line {line}): {message}")]
    BadCsv {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
