use thiserror::Error;

/// Errors raised by the laboratory. Each variant names the contract that was
/// violated; callers in the harness map them onto process exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("ellipticity violation: atom {omega} outside [{kappa}, {}]", 1.0 - kappa)]
    Ellipticity { omega: f64, kappa: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("non-ballistic distribution: E rho = {mean_rho} >= 1")]
    NonBallistic { mean_rho: f64 },

    #[error("window too short: need sites [{need_lo}, {need_hi}], have [{have_lo}, {have_hi}]")]
    WindowTooShort {
        need_lo: i64,
        need_hi: i64,
        have_lo: i64,
        have_hi: i64,
    },

    #[error("site ordering violation: {0}")]
    Ordering(String),

    #[error("partition divisibility violation: x/eps = {ratio} is not an integer")]
    Divisibility { ratio: f64 },

    #[error("walk left the environment window at site {site}")]
    WindowExit { site: i64 },

    #[error("window length {k} too large for trajectory of length {len}")]
    KTooLarge { k: usize, len: usize },

    #[error("left context too short at site {site}: burn-in {burn_in} seeds disagree by {gap:e}")]
    ContextTooShort { site: i64, burn_in: usize, gap: f64 },

    #[error("S(-inf) truncation failed after depth {depth}")]
    TruncationFailure { depth: usize },

    #[error("optimizer bracket failure on [{lo}, {hi}]: {reason}")]
    BracketFailure { lo: f64, hi: f64, reason: String },

    #[error("objective not concave near {at}")]
    NotConcave { at: f64 },

    #[error("DP coverage violation: {0}")]
    Coverage(String),

    #[error("estimate undefined: {0}")]
    Undefined(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
