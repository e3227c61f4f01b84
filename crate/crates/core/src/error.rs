use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("instability: beyond critical coupling g_c = {g_c:.5} (minimum of the potential spectrum {min_eigenvalue:e})")]
    Unstable { min_eigenvalue: f64, g_c: f64 },

    #[error("refusing near-critical input: relative distance to criticality {distance:e} is below {limit:e}")]
    NearCritical { distance: f64, limit: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("{0} is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("symplectic eigenvalue {value} violates the uncertainty bound nu >= 1")]
    Uncertainty { value: f64 },

    #[error("correlation table has no entry for displacement ({dx}, {dy})")]
    MissingDisplacement { dx: i64, dy: i64 },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("pair {i:?}-{j:?} is not symmetric (on-site moments differ by {relative:e} relative); center the pair")]
    AsymmetricPair {
        i: (i64, i64),
        j: (i64, i64),
        relative: f64,
    },

    #[error("quadrature did not converge after {refinements} refinements: last estimate {last:e}, previous {previous:e}")]
    Quadrature {
        refinements: usize,
        last: f64,
        previous: f64,
    },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("Hilbert space dimension {dim} exceeds the dense bound {max}")]
    Dimension { dim: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors that come from the physics (coupling at or beyond the
    /// transition) rather than from malformed input.
    pub fn is_physics_refusal(&self) -> bool {
        matches!(self, Error::Unstable { .. } | Error::NearCritical { .. })
    }
}
