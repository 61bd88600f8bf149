use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by mesh construction, operator assembly, the solvers and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh needs at least 4 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("mesh has no faces")]
    NoFaces,
    #[error("edge ({i}, {j}) is shared by {count} faces, expected exactly 2")]
    NonManifoldEdge { i: usize, j: usize, count: usize },
    #[error("face {face} repeats a vertex index")]
    DegenerateFace { face: usize },
    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("vertex {0} is not referenced by any face")]
    UnreferencedVertex(usize),
    #[error("mesh is not connected")]
    DisconnectedMesh,

    #[error("edge {edge} has zero length in the embedding")]
    ZeroLengthEdge { edge: usize },
    #[error("lengths violate the triangle inequality{}", face_suffix(*.face))]
    InvalidTriangle { face: Option<usize> },
    #[error("embedded triangle {face} is degenerate")]
    DegenerateTriangle { face: usize },
    #[error("metric is not valid on face {face}")]
    InvalidMetric { face: usize },
    #[error("initial metric is not valid on face {face}")]
    InvalidInitialMetric { face: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },
    #[error("per-vertex energy needs square residuals, got {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize },
    #[error("eigensolver failed: {0}")]
    EigensolverFailure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: face has {arity} vertices, only triangles are supported")]
    NonTriangleFace {
        path: PathBuf,
        line: usize,
        arity: usize,
    },
    #[error("edge ({i}, {j}) has no length in the metric file")]
    MissingEdge { i: usize, j: usize },
    #[error("{path}:{line}: ({i}, {j}) is not an edge of the mesh")]
    UnknownEdge {
        path: PathBuf,
        line: usize,
        i: usize,
        j: usize,
    },
    #[error("{path}:{line}: edge length must be positive")]
    NonPositiveLength { path: PathBuf, line: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn face_suffix(face: Option<usize>) -> String {
    match face {
        Some(f) => format!(" on face {f}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn dims(context: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
