use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cutoff must be at least {min}, got {got}")]
    Cutoff { got: usize, min: usize },

    #[error("mode index {mode} out of range for a {modes}-mode space")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("operation requires {expected} mode(s), got {got}")]
    ModeCount { expected: usize, got: usize },

    #[error("partial trace needs a nonempty set of kept modes")]
    EmptyKeepSet,

    #[error("{name} = {value} violates guard {guard}")]
    Guard {
        name: &'static str,
        value: f64,
        guard: &'static str,
    },

    #[error("|{name}| = {value} exceeds {limit}; truncation of the Fock space would corrupt the operator")]
    Truncation {
        name: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("truncated norm deficit {deficit:e} exceeds {limit:e}; raise the cutoff or lower lambda")]
    NormDeficit { deficit: f64, limit: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("state is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("filtered state has zero norm")]
    ZeroNorm,

    #[error("target state is not normalized (norm squared {norm_squared})")]
    NotNormalized { norm_squared: f64 },

    #[error("success probability {probability:e} is too small to be meaningful")]
    ZeroSuccess { probability: f64 },

    #[error("brute-force oracle requires a pure input (nu = 0), got nu = {nu}")]
    MixedInput { nu: f64 },

    #[error("brute-force oracle limited to cutoff {limit}, got {cutoff}")]
    MemoryGuard { cutoff: usize, limit: usize },

    #[error("no interior maximum of E_N over alpha in ({lo}, {hi}]")]
    NoInteriorMaximum { lo: f64, hi: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("all {0} sweep points failed")]
    SweepFailed(usize),

    #[error("{0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI and the C API.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Cutoff { .. } => "cutoff",
            Error::ModeOutOfRange { .. } => "mode_out_of_range",
            Error::Dimension { .. } => "dimension",
            Error::ModeCount { .. } => "mode_count",
            Error::EmptyKeepSet => "empty_keep_set",
            Error::Guard { .. } => "guard",
            Error::Truncation { .. } => "truncation",
            Error::NormDeficit { .. } => "norm_deficit",
            Error::NonFinite => "non_finite",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::NotPsd { .. } => "not_psd",
            Error::ZeroNorm => "zero_norm",
            Error::NotNormalized { .. } => "not_normalized",
            Error::ZeroSuccess { .. } => "zero_success",
            Error::MixedInput { .. } => "mixed_input",
            Error::MemoryGuard { .. } => "memory_guard",
            Error::NoInteriorMaximum { .. } => "no_interior_maximum",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::TooFewPoints { .. } => "too_few_points",
            Error::SweepFailed(_) => "sweep_failed",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn guard(ok: bool, name: &'static str, value: f64, guard: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Guard { name, value, guard })
    }
}
