use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("massless 1+1 field is infrared divergent; use mass > 0")]
    MasslessOneDim,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("|k| = {k} outside tabulated range [{lo}, {hi}]")]
    OutOfRange { k: f64, lo: f64, hi: f64 },

    #[error("bilinear table invariant violated: {0}")]
    InvalidTable(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("assembled state not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("fine-tuning violated: E(f1,f2) = {e12} is not pi/4 mod 2pi within {tol:.1e}")]
    FineTuningViolated { e12: f64, tol: f64 },

    #[error("causal-overlap precondition violated: max |E(f_i,g_j)| = {max_cross:.3e}")]
    CausalOverlap { max_cross: f64 },

    #[error("no fine-tuning solution: coupling-stripped E(f1,f2) is zero")]
    NoSolution,

    #[error("singular decoding system at grid node {index} (|k| = {k})")]
    SingularNode { index: usize, k: f64 },

    #[error("Fock truncation N = {n} below hard bound {bound} for amplitude {amplitude:.3}")]
    TruncationTooSmall { n: usize, bound: usize, amplitude: f64 },

    #[error("Fock space too large: dimension {dimension} exceeds limit {limit}")]
    MemoryBound { dimension: usize, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
