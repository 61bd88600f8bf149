//! Vertex embeddings in R^3 and a few extrinsic helpers used by the pipelines and tests.

use nalgebra::{DMatrix, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

pub type Point = Vector3<f64>;

/// Vertex coordinates, one row per mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    points: Vec<Point>,
}

impl Embedding {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if let Some(i) = points
            .iter()
            .position(|p| !p.iter().all(|c| c.is_finite()))
        {
            return Err(Error::InvalidArgument(format!(
                "vertex {i} has non-finite coordinates"
            )));
        }
        Ok(Embedding { points })
    }

    pub fn from_rows(rows: &[[f64; 3]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| Point::new(r[0], r[1], r[2])).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn to_rows(&self) -> Vec<[f64; 3]> {
        self.points.iter().map(|p| [p.x, p.y, p.z]).collect()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.points.len(), 3, |i, c| self.points[i][c])
    }

    pub(crate) fn from_matrix(m: &DMatrix<f64>) -> Self {
        Embedding {
            points: (0..m.nrows())
                .map(|i| Point::new(m[(i, 0)], m[(i, 1)], m[(i, 2)]))
                .collect(),
        }
    }

    pub(crate) fn check_rows(&self, mesh: &Mesh) -> Result<()> {
        if self.len() != mesh.vertex_count() {
            return Err(Error::dims(
                "embedding rows",
                mesh.vertex_count(),
                self.len(),
            ));
        }
        Ok(())
    }

    pub fn centroid(&self) -> Point {
        self.points.iter().sum::<Point>() / self.points.len() as f64
    }

    pub fn centered(&self) -> Self {
        let c = self.centroid();
        Embedding {
            points: self.points.iter().map(|p| p - c).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Embedding {
            points: self.points.iter().map(|p| p * s).collect(),
        }
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let mut lo = Point::repeat(f64::INFINITY);
        let mut hi = Point::repeat(f64::NEG_INFINITY);
        for p in &self.points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }

    /// Adds isotropic Gaussian noise with standard deviation `sigma` to every coordinate.
    pub fn perturbed<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> Self {
        if sigma == 0.0 {
            return self.clone();
        }
        let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
        Embedding {
            points: self
                .points
                .iter()
                .map(|p| p + Point::from_fn(|_, _| normal.sample(rng)))
                .collect(),
        }
    }
}

/// Symmetric Hausdorff distance between two point sets, by brute force.
pub fn hausdorff_distance(a: &Embedding, b: &Embedding) -> f64 {
    let directed = |from: &Embedding, to: &Embedding| {
        from.points
            .iter()
            .map(|p| {
                to.points
                    .iter()
                    .map(|q| (p - q).norm_squared())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
            .sqrt()
    };
    directed(a, b).max(directed(b, a))
}
