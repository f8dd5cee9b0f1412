use crate::sbp::SbpOrder;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{order} operators need at least {min} grid points, got {n}")]
    TooFewPoints { order: SbpOrder, min: usize, n: usize },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("boundary data is nonzero at flat index {index}, which lies off the penalized slice")]
    BoundaryDataOffSlice { index: usize },

    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("initial data must vanish at the wall x = {x} for the Dirichlet extension (found {value:e})")]
    IncompatibleWallData { x: f64, value: f64 },

    #[error("degenerate time map: |D_tau t| = {value:e} at flat index {index}")]
    DegenerateTimeMap { index: usize, value: f64 },

    #[error("reference integration became unstable near tau = {tau}; use a smaller reference step")]
    UnstableReference { tau: f64 },

    #[error("flux-to-velocity system is singular (det = {det:e}) at sigma = {sigma}")]
    DegenerateFlux { sigma: f64, det: f64 },

    #[error("reference refinement must be at least {min}, got {got}")]
    RefinementTooSmall { min: usize, got: usize },

    #[error("convergence fit needs at least 3 points, got {0}")]
    TooFewFitPoints(usize),

    #[error("convergence data must be strictly positive, got ({spacing}, {error})")]
    NonPositiveFitData { spacing: f64, error: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

pub(crate) fn check_finite(what: &'static str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
