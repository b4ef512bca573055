use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point outside the domain of the defining function: {0}")]
    OutsideDomain(String),

    #[error("point is not on the boundary (|rho| = {rho:.3e} > tolerance {tol:.3e})")]
    NotOnBoundary { rho: f64, tol: f64 },

    #[error("coincident points: probe requires z != w")]
    CoincidentPoints,

    #[error("no chart atlas registered for domain `{0}`")]
    MissingAtlas(String),

    #[error("root finding failed in chart `{chart}` at parameters {params:?}")]
    RootFinding { chart: String, params: [f64; 3] },

    #[error("degenerate tangent frame at node {node} (Gram determinant {gram:.3e})")]
    DegenerateFrame { node: usize, gram: f64 },

    #[error("kernel evaluated too close to the diagonal (|denominator| = {denominator:.3e})")]
    NearDiagonal { denominator: f64 },

    #[error("evaluation point is not strictly interior (rho = {rho:.3e})")]
    NotInterior { rho: f64 },

    #[error("support distance {distance:.3e} below required {required:.3e}")]
    SupportDistance { distance: f64, required: f64 },

    #[error("operator assembly refused: {nodes} nodes exceeds the cap of {cap}")]
    MemoryGuard { nodes: usize, cap: usize },

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("basis Gram matrix is rank deficient (condition number {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("empty mask")]
    EmptyMask,

    #[error("power iteration did not converge in {iterations} iterations (last estimate {estimate:.6e})")]
    NonConvergence { iterations: usize, estimate: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("mesh cache format error: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
