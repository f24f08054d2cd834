use thiserror::Error;

/// Errors raised by mesh construction, the numerical kernels and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("edge ({0}, {1}) is shared by more than two faces or appears twice with the same orientation")]
    NonManifoldEdge(usize, usize),
    #[error("edge ({0}, {1}) lies on an open boundary")]
    OpenBoundary(usize, usize),
    #[error("face {0} repeats a vertex")]
    DegenerateFace(usize),
    #[error("vertex {0} is not referenced by any face")]
    IsolatedVertex(usize),
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("face {face} is degenerate (area {area:e})")]
    DegenerateTriangle { face: usize, area: f64 },
    #[error("edge {edge} has non-positive or non-finite length {length}")]
    NonpositiveLength { edge: usize, length: f64 },
    #[error("face {face} violates the triangle inequality")]
    TriangleInequalityViolated { face: usize },
    #[error("mesh is already closed")]
    AlreadyClosed,
    #[error("target angles violate Gauss-Bonnet: residual {residual:e}")]
    GaussBonnetViolation { residual: f64 },
    #[error("target angle at vertex {vertex} is not positive")]
    NonpositiveAngle { vertex: usize },
    #[error("expected {expected} values, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("edge {edge} is glued to itself on both sides; the flip is undefined")]
    SelfAdjacentFlip { edge: usize },
    #[error("flip limit of {limit} exceeded while restoring the Delaunay condition")]
    FlipLimitExceeded { limit: usize },
    #[error("reference triangle is degenerate (lengths {lengths:?})")]
    DegenerateReference { lengths: [f64; 3] },
    #[error("normal equations are singular")]
    SingularNormalEquations,
    #[error("linear system is not positive definite")]
    NotPositiveDefinite,
    #[error("shear differences have non-zero vertex sums (max {max_sum:e})")]
    InfeasibleConstraints { max_sum: f64 },
    #[error("vertex {vertex} is not flat (angle defect {defect:e})")]
    NotFlat { vertex: usize, defect: f64 },
    #[error("{0}")]
    InvalidInput(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: face has {count} vertices; only triangles are supported")]
    NonTriangleFace { line: usize, count: usize },
    #[error("vertex index {index} out of range (mesh has {count} vertices)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonManifoldEdge(..) => "NonManifoldEdge",
            Error::OpenBoundary(..) => "OpenBoundary",
            Error::DegenerateFace(_) => "DegenerateFace",
            Error::IsolatedVertex(_) => "IsolatedVertex",
            Error::EmptyMesh => "EmptyMesh",
            Error::DegenerateTriangle { .. } => "DegenerateTriangle",
            Error::NonpositiveLength { .. } => "NonpositiveLength",
            Error::TriangleInequalityViolated { .. } => "TriangleInequalityViolated",
            Error::AlreadyClosed => "AlreadyClosed",
            Error::GaussBonnetViolation { .. } => "GaussBonnetViolation",
            Error::NonpositiveAngle { .. } => "NonpositiveAngle",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::SelfAdjacentFlip { .. } => "SelfAdjacentFlip",
            Error::FlipLimitExceeded { .. } => "FlipLimitExceeded",
            Error::DegenerateReference { .. } => "DegenerateReference",
            Error::SingularNormalEquations => "SingularNormalEquations",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::InfeasibleConstraints { .. } => "InfeasibleConstraints",
            Error::NotFlat { .. } => "NotFlat",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Parse { .. } => "ParseError",
            Error::NonTriangleFace { .. } => "NonTriangleFace",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
