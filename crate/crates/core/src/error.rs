use thiserror::Error;

/// Errors produced by the cover construction, sampling and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("signatures belong to different point sets ({0} vs {1})")]
    OwnerMismatch(u64, u64),

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("unknown kernel `{0}`; valid names: gaussian, laplace, epanechnikov, triangle, quartic, triweight, truncated_gaussian")]
    UnknownKernel(String),

    #[error("{0} requires a positive-definite kernel")]
    NotPositiveDefinite(&'static str),

    #[error("terminal embedding solver infeasible after {iterations} sweeps (worst constraint violation {worst_violation:.3e})")]
    Infeasible {
        worst_violation: f64,
        iterations: usize,
    },

    #[error("no transversal intersection: 4Δ = {four_delta:.6e}")]
    NoIntersection { four_delta: f64 },

    #[error("negative squared-norm root y = {0:.6e}")]
    NegativeRoot(f64),

    #[error("no admissible integer index in [{lo:.4}, {hi:.4}]; use a smaller eps")]
    EmptyIndexInterval { lo: f64, hi: f64 },

    #[error("lattice net would hold about {estimate:.3e} points (budget {budget})")]
    LatticeTooLarge { estimate: f64, budget: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "(0, 1)",
        })
    }
}
