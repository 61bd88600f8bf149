//! Discrete metrics: one positive length per mesh edge.

use crate::error::{Error, Result};
use crate::geometry::Embedding;
use crate::mesh::Mesh;

/// Default relative margin for the strong triangle inequality.
pub const DEFAULT_REL_MARGIN: f64 = 1e-7;

/// Edge lengths in the canonical edge order of a [`Mesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMetric {
    lengths: Vec<f64>,
}

impl DiscreteMetric {
    /// Wraps a length vector after checking its size and positivity.
    ///
    /// Triangle inequalities are checked separately by [`validate_metric`].
    pub fn new(mesh: &Mesh, lengths: Vec<f64>) -> Result<Self> {
        if lengths.len() != mesh.edge_count() {
            return Err(Error::dims("metric length", mesh.edge_count(), lengths.len()));
        }
        if let Some(e) = lengths.iter().position(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "edge {e} has non-positive length {}",
                lengths[e]
            )));
        }
        Ok(DiscreteMetric { lengths })
    }

    pub(crate) fn from_vec_unchecked(lengths: Vec<f64>) -> Self {
        DiscreteMetric { lengths }
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn into_lengths(self) -> Vec<f64> {
        self.lengths
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.lengths.iter().sum::<f64>() / self.lengths.len() as f64
    }

    pub fn scaled(&self, s: f64) -> Self {
        DiscreteMetric {
            lengths: self.lengths.iter().map(|l| l * s).collect(),
        }
    }

    /// The three lengths of face `f`, ordered as edges `ij`, `jk`, `ki`.
    pub fn face_lengths(&self, mesh: &Mesh, f: usize) -> [f64; 3] {
        mesh.face_edges()[f].map(|e| self.lengths[e])
    }
}

/// Result of checking the strong triangle inequality on every face.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricValidity {
    pub valid: bool,
    /// `(face, margin)` where `margin` is the smallest of the face's three slacks.
    pub violations: Vec<(usize, f64)>,
}

/// Lengths induced by an embedding.
pub fn metric_from_embedding(mesh: &Mesh, x: &Embedding) -> Result<DiscreteMetric> {
    x.check_rows(mesh)?;
    let lengths = mesh
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &[i, j])| {
            let l = (x.point(i) - x.point(j)).norm();
            if l > 0.0 {
                Ok(l)
            } else {
                Err(Error::ZeroLengthEdge { edge: e })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteMetric { lengths })
}

/// Smallest of the three triangle-inequality slacks and the semi-perimeter.
pub(crate) fn slack(l: [f64; 3]) -> (f64, f64) {
    let [a, b, c] = l;
    let m = (a + b - c).min(b + c - a).min(c + a - b);
    (m, 0.5 * (a + b + c))
}

pub(crate) fn face_is_valid(l: [f64; 3], rel_margin: f64) -> bool {
    let (m, s) = slack(l);
    m > rel_margin * s
}

/// Checks that every face's slacks exceed `rel_margin` times its semi-perimeter.
///
/// Never fails; lengths that are not positive are reported through the slack of their faces.
pub fn validate_metric(mesh: &Mesh, metric: &DiscreteMetric, rel_margin: f64) -> MetricValidity {
    let violations: Vec<_> = (0..mesh.face_count())
        .filter_map(|f| {
            let l = metric.face_lengths(mesh, f);
            let (m, s) = slack(l);
            let ok = m > rel_margin * s && l.iter().all(|x| *x > 0.0);
            (!ok).then_some((f, m))
        })
        .collect();
    MetricValidity {
        valid: violations.is_empty(),
        violations,
    }
}

pub(crate) fn first_invalid_face(mesh: &Mesh, lengths: &[f64], rel_margin: f64) -> Option<usize> {
    mesh.face_edges()
        .iter()
        .position(|fe| !face_is_valid(fe.map(|e| lengths[e]), rel_margin))
}

/// Heron's formula in Kahan's cancellation-free ordering.
pub fn triangle_area(a: f64, b: f64, c: f64) -> Result<f64> {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let radicand = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if radicand > 0.0 && c > 0.0 {
        Ok(0.25 * radicand.sqrt())
    } else {
        Err(Error::InvalidTriangle { face: None })
    }
}

/// Per-face areas in face-list order.
pub fn face_areas(mesh: &Mesh, metric: &DiscreteMetric) -> Result<Vec<f64>> {
    (0..mesh.face_count())
        .map(|f| {
            let [a, b, c] = metric.face_lengths(mesh, f);
            triangle_area(a, b, c).map_err(|_| Error::InvalidTriangle { face: Some(f) })
        })
        .collect()
}
