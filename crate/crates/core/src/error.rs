use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: argument outside the domain ({detail})")]
    Domain { op: &'static str, detail: String },

    #[error("grid has {nodes} nodes, limit is {limit}")]
    GridTooLarge { nodes: usize, limit: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("kernel singularity of order {0} is not integrable in four dimensions")]
    NonIntegrable(f64),

    #[error("λ = {lambda} is not resolved by the grid (limit {limit})")]
    Unresolved { lambda: f64, limit: f64 },

    #[error("potential vanishes on the grid")]
    ZeroPotential,

    #[error("ill-separated spectrum: included {included:.3e}, excluded {excluded:.3e}, gap ratio {ratio:.3e}")]
    SpectralGap {
        included: f64,
        excluded: f64,
        ratio: f64,
    },

    #[error("singular matrix in {0}")]
    Singular(String),

    #[error("expected classification {expected}, found {found}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("Γ = S1 - S2 has rank {0}; at most one is allowed")]
    GammaRank(usize),

    #[error("no sign change of the tracked eigenvalue on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("root finder did not converge: {0}")]
    NoConvergence(String),

    #[error("fit failure: {0}")]
    Fit(String),

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("linear algebra: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}
