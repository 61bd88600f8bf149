use std::fmt;

use super::stiffness_matrix;
use crate::error::Result;
use crate::mesh::Mesh;
use crate::metric::{slack, DiscreteMetric};

/// Negative cotangent weights, obtuse faces and the tightest triangle inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshQualityReport {
    /// `(edge, weight)` for every edge with `w_ij < 0`.
    pub negative_weight_edges: Vec<(usize, f64)>,
    pub obtuse_faces: Vec<usize>,
    /// Smallest triangle-inequality slack over all faces.
    pub min_slack: f64,
    /// Smallest slack divided by the semi-perimeter of its face.
    pub min_relative_slack: f64,
}

impl MeshQualityReport {
    pub fn is_clear(&self) -> bool {
        self.negative_weight_edges.is_empty() && self.obtuse_faces.is_empty()
    }
}

pub fn mesh_quality_report(mesh: &Mesh, metric: &DiscreteMetric) -> Result<MeshQualityReport> {
    let w = stiffness_matrix(mesh, metric)?;
    let negative_weight_edges = w
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, w)| **w < 0.0)
        .map(|(e, w)| (e, *w))
        .collect();

    let mut obtuse_faces = Vec::new();
    let mut min_slack = f64::INFINITY;
    let mut min_relative_slack = f64::INFINITY;
    for f in 0..mesh.face_count() {
        let l = metric.face_lengths(mesh, f);
        let sq = l.map(|x| x * x);
        if (0..3).any(|a| sq[a] > sq[(a + 1) % 3] + sq[(a + 2) % 3]) {
            obtuse_faces.push(f);
        }
        let (m, s) = slack(l);
        min_slack = min_slack.min(m);
        min_relative_slack = min_relative_slack.min(m / s);
    }
    Ok(MeshQualityReport {
        negative_weight_edges,
        obtuse_faces,
        min_slack,
        min_relative_slack,
    })
}

impl fmt::Display for MeshQualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "negative weights: {}", self.negative_weight_edges.len())?;
        for (e, w) in &self.negative_weight_edges {
            writeln!(f, "  edge {e}: {w:.6e}")?;
        }
        writeln!(f, "obtuse faces: {}", self.obtuse_faces.len())?;
        for face in &self.obtuse_faces {
            writeln!(f, "  face {face}")?;
        }
        writeln!(f, "min slack: {:.6e}", self.min_slack)?;
        write!(f, "min relative slack: {:.6e}", self.min_relative_slack)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Embedding;
    use crate::metric::metric_from_embedding;
    use crate::primitives;
    use crate::testing::jittered;

    #[test]
    fn regular_tetrahedron_is_clear() {
        let (mesh, x) = primitives::regular_tetrahedron();
        let report = mesh_quality_report(&mesh, &metric_from_embedding(&mesh, &x).unwrap()).unwrap();
        assert!(report.is_clear());
        assert!((report.min_slack - 1.0).abs() < 1e-15);
    }

    #[test]
    fn obtuse_face_detected() {
        // squash a tetrahedron so the faces around edge (0,1) get a wide angle
        let x = Embedding::from_rows(&[
            [-1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.3, 0.1],
            [0.0, -0.3, 0.1],
        ])
        .unwrap();
        let (mesh, _) = primitives::regular_tetrahedron();
        let report = mesh_quality_report(&mesh, &metric_from_embedding(&mesh, &x).unwrap()).unwrap();
        assert!(!report.obtuse_faces.is_empty());
    }

    #[test]
    fn face_3_4_6_is_obtuse() {
        let (mesh, _) = primitives::regular_tetrahedron();
        let mut lengths = vec![5.0; 6];
        lengths[mesh.edge_index(0, 1).unwrap()] = 3.0;
        lengths[mesh.edge_index(1, 2).unwrap()] = 4.0;
        lengths[mesh.edge_index(0, 2).unwrap()] = 6.0;
        let l = DiscreteMetric::new(&mesh, lengths).unwrap();
        let report = mesh_quality_report(&mesh, &l).unwrap();
        assert_eq!(report.obtuse_faces, vec![0]);
    }

    #[test]
    fn negative_weights_match_angle_oracle() {
        let (mesh, x) = primitives::icosphere(1);
        let x = jittered(&x, 0.25, 13);
        let l = metric_from_embedding(&mesh, &x).unwrap();
        let report = mesh_quality_report(&mesh, &l).unwrap();
        let mut oracle = 0;
        for (e, &[i, j]) in mesh.edges().iter().enumerate() {
            let (k, h) = mesh.edge_opposite_vertices(e).unwrap();
            let cot = |o: usize| {
                let u = x.point(i) - x.point(o);
                let v = x.point(j) - x.point(o);
                u.dot(&v) / u.cross(&v).norm()
            };
            if cot(k) + cot(h) < 0.0 {
                oracle += 1;
            }
        }
        assert!(oracle > 0, "jitter should produce some negative weights");
        assert_eq!(report.negative_weight_edges.len(), oracle);
    }
}
