use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("eigenvalues are not simple or left/right matching is ambiguous (separation {separation:.3e})")]
    DegenerateSpectrum { separation: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("bordered matrix B + y xᴴ is numerically singular (condition estimate {cond:.3e})")]
    SingularShift { cond: f64 },

    #[error("capacitance matrix of the low-rank update is numerically singular")]
    SingularCapacitance,

    #[error("core factor T is ill conditioned (condition {cond:.3e})")]
    IllConditionedT { cond: f64 },

    #[error("retraction produced rank-deficient factors")]
    RankCollapse,

    #[error("step size fell below {h_min:e} without decreasing r")]
    StepsizeUnderflow { h_min: f64 },

    #[error(
        "state is not stationary (residual {residual:.3e}); derivative formula does not apply"
    )]
    NotStationary { residual: f64 },

    #[error("derivative of r vanishes (|r'| = {0:e})")]
    DegenerateDerivative(f64),

    #[error("bracket [{lo}, {hi}] collapsed without meeting the tolerance")]
    BracketExhausted { lo: f64, hi: f64 },

    #[error("outer iteration did not converge within {0} iterations")]
    MaxOuterIterations(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("report schema violation: {0}")]
    Schema(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
