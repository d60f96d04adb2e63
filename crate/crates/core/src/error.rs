use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("could not isolate modes {lower} and {upper}: {detail}")]
    DegenerateBracket {
        lower: usize,
        upper: usize,
        detail: String,
    },

    #[error("branch tracking failed for mode {index} (colliding with mode {neighbor}): {detail}")]
    BranchTracking {
        index: usize,
        neighbor: usize,
        detail: String,
    },

    #[error("quadrature did not converge: achieved relative error {achieved:.3e}, target {target:.3e}")]
    Quadrature { achieved: f64, target: f64 },

    #[error(
        "denominator between modes {k} and {j} is {gap:.3e}, below the degeneracy floor {floor:.3e}; \
         use the two-mode resonant model for this pair"
    )]
    NearDegenerate {
        k: usize,
        j: usize,
        gap: f64,
        floor: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("Hilbert space dimension {dim} exceeds the limit {limit}")]
    Dimension { dim: usize, limit: usize },
}

impl Error {
    /// True for errors caused by user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Domain(_))
    }
}
