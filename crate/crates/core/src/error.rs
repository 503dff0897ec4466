use thiserror::Error;

/// Errors produced by mesh handling, energy evaluation and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-triangular face at line {line}")]
    NonTriangularFace { line: usize },

    #[error("face {face} references vertex {index} but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },

    #[error("face {face} repeats a vertex")]
    RepeatedVertex { face: usize },

    #[error("edge ({0}, {1}) is shared by more than two faces")]
    NonManifoldEdge(usize, usize),

    #[error("edge ({0}, {1}) is traversed in the same direction by both incident faces")]
    InconsistentOrientation(usize, usize),

    #[error("operation requires a closed mesh but {count} boundary edges are present")]
    BoundaryPresent { count: usize },

    #[error("operation requires a mesh with boundary")]
    ClosedMesh,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degenerate triangle {face:?}")]
    DegenerateTriangle { face: [usize; 3] },

    #[error("edge ({0}, {1}) is a boundary edge")]
    BoundaryEdge(usize, usize),

    #[error("angle of edge ({i}, {j}) could not be evaluated: {source}")]
    Edge {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("vertex {vertex} coincides with the inversion center")]
    VertexAtCenter { vertex: usize },

    #[error("linear system is singular: {0}")]
    Singular(String),

    #[error("non-positive angle weight {weight} on edge {edge}")]
    NonPositiveWeight { edge: usize, weight: f64 },

    #[error("grid structure absent: {0}")]
    GridMismatch(String),

    #[error("active-set iteration limit reached after {iterations} iterations")]
    IterationLimit { iterations: usize, best: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;
