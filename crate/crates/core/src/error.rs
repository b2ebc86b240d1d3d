use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigenspace multiplicity {multiplicity} exceeds the enumeration cap {cap}")]
    EigenspaceTooLarge { multiplicity: u128, cap: u128 },

    #[error("eigenvalue {lambda_sq} is not of the form 2N+{n}")]
    ParityMismatch { n: usize, lambda_sq: u64 },

    #[error("evaluation too close to a pole of the phase (t = {t})")]
    PoleProximity { t: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("derivative of order {order} is ill conditioned (estimated error {error:e} against term {term:e})")]
    Conditioning { order: usize, error: f64, term: f64 },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    NonConvergence { achieved: f64, requested: f64 },

    #[error("query too close to the diagonal for the oscillatory quadrature")]
    NearDiagonal,

    #[error("grid spacing {spacing:e} too coarse, need at most {required:e}")]
    Resolution { spacing: f64, required: f64 },

    #[error("infeasible construction: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
