//! Shape synthesis from intrinsic differential operators.
//!
//! Given target operators (a cotangent Laplacian, or area-based and conformal shape
//! differences), the solvers look for an embedding of a closed triangle mesh whose induced
//! edge lengths reproduce them. The optimization alternates between descent on the edge
//! lengths, kept inside the triangle-inequality cone, and stress majorization to realize the
//! lengths in R^3.

pub mod cli;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod metric;
pub mod operators;
pub mod pipeline;
pub mod primitives;
pub mod solvers;
#[doc(hidden)]
pub mod testing;

pub use error::{Error, Result};
pub use geometry::Embedding;
pub use mesh::Mesh;
pub use metric::DiscreteMetric;
