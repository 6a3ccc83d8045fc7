use thiserror::Error;

/// Errors raised by the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: must satisfy {bound}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("resolution bound violated: {modes} modes need mode index {max_index} resolved by at least {required} nodes on axis {axis}, grid has {nodes}")]
    Unresolved {
        modes: usize,
        axis: usize,
        max_index: usize,
        required: usize,
        nodes: usize,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("singular evaluation: g(r) with eps = 0 requires r > 0, got r = {0}")]
    SingularEvaluation(f64),

    #[error("non-finite value {value} at interior node {node}")]
    NonFinite { node: usize, value: f64 },

    #[error("positivity violated: interior minimum {min} below -{tol}")]
    Positivity { min: f64, tol: f64 },

    #[error("ordering violated ({what}) at iteration {iteration}: margin {margin:e} exceeds {limit:e}; increase the mode count")]
    Ordering {
        what: &'static str,
        iteration: usize,
        margin: f64,
        limit: f64,
    },

    #[error("bracket rejected: {0}")]
    Bracket(String),

    #[error("extension: {0}")]
    Extension(String),

    #[error("continuation: {0}")]
    Continuation(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "s",
            value: s,
            bound: "0 < s <= 1",
        })
    }
}
