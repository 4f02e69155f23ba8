use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// A rate or ζ denominator fell below the collision tolerance.
    #[error("resonance collision: {condition} = {value:.3e}")]
    ResonanceCollision { condition: String, value: f64 },

    #[error(
        "truncation overflow: population {population:.3e} on the top rung (n_max = {n_max}); \
         try n_max = {suggested}"
    )]
    Truncation {
        population: f64,
        n_max: usize,
        suggested: usize,
    },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("validity check failed: {0}")]
    Validity(String),

    #[error("no resonance found: {0}")]
    NoResonance(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("did not converge: {0}")]
    Convergence(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParams(_) => 2,
            Error::Validity(_) => 4,
            _ => 3,
        }
    }
}

/// Guards a denominator against the collision tolerance (1e-9 in units of ω0).
pub(crate) fn guard(value: f64, omega0: f64, condition: impl FnOnce() -> String) -> Result<f64> {
    if value.abs() < 1e-9 * omega0 {
        Err(Error::ResonanceCollision {
            condition: condition(),
            value,
        })
    } else {
        Ok(value)
    }
}
