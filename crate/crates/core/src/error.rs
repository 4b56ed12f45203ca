use thiserror::Error;

/// Errors raised by quiver construction, structural operations and
/// the numerical layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid quiver: {0}")]
    InvalidQuiver(String),

    #[error("vertex index {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("edge index {edge} out of range (m = {m})")]
    EdgeOutOfRange { edge: usize, m: usize },

    #[error("operation requires a simple graph (no loops, no multiple connections)")]
    NotSimple,

    #[error("operation requires a quiver without multiple connections")]
    MultiConnection,

    #[error("operation requires a triangle-free graph: vertices {0}, {1}, {2} form a triangle")]
    TriangleFound(usize, usize, usize),

    #[error("quiver is disconnected (loops do not connect)")]
    Disconnected,

    #[error("invalid family parameters: {0}")]
    BadFamilyParams(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigensolver residual {residual:.3e} exceeds contract {bound:.3e}")]
    EigenResidual { residual: f64, bound: f64 },

    #[error(
        "eigenvalue {value:.6e} is within a factor 100 of the kernel threshold {threshold:.3e}; \
         cannot classify as zero or nonzero"
    )]
    AmbiguousKernel { value: f64, threshold: f64 },

    #[error("integer overflow in exact arithmetic: {0}")]
    Overflow(String),

    #[error("numerical inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
