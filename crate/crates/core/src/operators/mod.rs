//! Intrinsic operators built from a discrete metric: the lumped mass matrix, the
//! length-based cotangent stiffness matrix, shape-difference operators and diagnostics.

mod difference;
mod quality;
mod spectral;

pub use difference::{
    area_difference, conformal_difference, functional_map_from_point_map, DifferenceKind,
    FunctionalMap, ShapeDifference, SpectralTruncation,
};
pub use quality::{mesh_quality_report, MeshQualityReport};
pub use spectral::{lb_eigenbasis, pseudoinverse, pseudoinverse_symmetric, Eigenbasis};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::Embedding;
use crate::mesh::Mesh;
use crate::metric::{face_areas, DiscreteMetric};

/// Default relative eigenvalue cutoff for pseudoinverses.
pub const DEFAULT_PINV_REL_TOL: f64 = 1e-10;

/// Diagonal lumped mass matrix: one third of the incident face areas per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrix {
    diag: Vec<f64>,
}

impl MassMatrix {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if let Some(i) = diag.iter().position(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "mass entry {i} is not positive: {}",
                diag[i]
            )));
        }
        Ok(MassMatrix { diag })
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.diag))
    }
}

/// Symmetric stiffness matrix stored per edge, with the diagonal as negative row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessMatrix {
    edges: Vec<[usize; 2]>,
    weights: Vec<f64>,
    diag: Vec<f64>,
}

impl StiffnessMatrix {
    /// Assembles the matrix from per-edge weights; the diagonal is derived.
    pub fn from_edge_weights(mesh: &Mesh, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != mesh.edge_count() {
            return Err(Error::dims("edge weights", mesh.edge_count(), weights.len()));
        }
        let edges = mesh.edges().to_vec();
        let mut row_sums = vec![0.0; mesh.vertex_count()];
        for (&[i, j], &w) in edges.iter().zip(&weights) {
            row_sums[i] += w;
            row_sums[j] += w;
        }
        let diag = row_sums.into_iter().map(|s: f64| -s).collect();
        Ok(StiffnessMatrix {
            edges,
            weights,
            diag,
        })
    }

    /// Reads edge weights out of a dense matrix, checking that it has the mesh's sparsity,
    /// is symmetric and has zero row sums up to `tol` (relative to its largest entry).
    pub fn from_dense(mesh: &Mesh, m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = mesh.vertex_count();
        if m.shape() != (n, n) {
            return Err(Error::dims(
                "stiffness matrix",
                format!("{n}x{n}"),
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let mut weights = Vec::with_capacity(mesh.edge_count());
        for &[i, j] in mesh.edges() {
            if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                return Err(Error::InvalidArgument(format!(
                    "stiffness matrix is not symmetric at ({i}, {j})"
                )));
            }
            weights.push(0.5 * (m[(i, j)] + m[(j, i)]));
        }
        let w = Self::from_edge_weights(mesh, weights)?;
        for i in 0..n {
            for j in 0..n {
                let expected = w.get(i, j);
                if (m[(i, j)] - expected).abs() > tol * scale {
                    return Err(Error::InvalidArgument(format!(
                        "stiffness matrix entry ({i}, {j}) does not match mesh sparsity or zero row sums"
                    )));
                }
            }
        }
        Ok(w)
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Off-diagonal weights `w_ij` in canonical edge order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        match self.edges.binary_search(&[i.min(j), i.max(j)]) {
            Ok(e) => self.weights[e],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::from_diagonal(&DVector::from_column_slice(&self.diag));
        for (&[i, j], &w) in self.edges.iter().zip(&self.weights) {
            m[(i, j)] = w;
            m[(j, i)] = w;
        }
        debug_assert_eq!(m.nrows(), n);
        m
    }

    /// `W v`. Off-diagonal contributions are summed in the same order as the diagonal, so
    /// constant vectors map to exactly zero.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut off = vec![0.0; self.size()];
        for (&[i, j], &w) in self.edges.iter().zip(&self.weights) {
            off[i] += w * v[j];
            off[j] += w * v[i];
        }
        off.iter()
            .zip(&self.diag)
            .zip(v)
            .map(|((o, d), x)| d * x + o)
            .collect()
    }

    /// `W M` for a dense `M` with `n` rows.
    pub fn mul_dense(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for c in 0..m.ncols() {
            let col = m.column(c);
            let mut dst = out.column_mut(c);
            for (&[i, j], &w) in self.edges.iter().zip(&self.weights) {
                dst[i] += w * col[j];
                dst[j] += w * col[i];
            }
            for (i, d) in self.diag.iter().enumerate() {
                dst[i] += d * col[i];
            }
        }
        out
    }

    pub(crate) fn check_size(&self, n: usize, context: &'static str) -> Result<()> {
        if self.size() != n {
            return Err(Error::dims(context, n, self.size()));
        }
        Ok(())
    }
}

/// Lumped vertex areas from Heron face areas.
pub fn mass_matrix(mesh: &Mesh, metric: &DiscreteMetric) -> Result<MassMatrix> {
    let areas = face_areas(mesh, metric)?;
    Ok(mass_from_face_areas(mesh, &areas))
}

pub(crate) fn mass_from_face_areas(mesh: &Mesh, areas: &[f64]) -> MassMatrix {
    let mut diag = vec![0.0; mesh.vertex_count()];
    for (face, area) in mesh.faces().iter().zip(areas) {
        for &v in face {
            diag[v] += area / 3.0;
        }
    }
    MassMatrix { diag }
}

/// Half-cotangent of the angle opposite each local edge of a face, from lengths only.
pub(crate) fn half_cotangents(l: [f64; 3], area: f64) -> [f64; 3] {
    let sq = l.map(|x| x * x);
    std::array::from_fn(|a| (-sq[a] + sq[(a + 1) % 3] + sq[(a + 2) % 3]) / (8.0 * area))
}

/// Cotangent weights computed from edge lengths alone.
pub fn stiffness_matrix(mesh: &Mesh, metric: &DiscreteMetric) -> Result<StiffnessMatrix> {
    let areas = face_areas(mesh, metric)?;
    Ok(stiffness_from_face_areas(mesh, metric, &areas))
}

pub(crate) fn stiffness_from_face_areas(
    mesh: &Mesh,
    metric: &DiscreteMetric,
    areas: &[f64],
) -> StiffnessMatrix {
    let mut weights = vec![0.0; mesh.edge_count()];
    for (f, fe) in mesh.face_edges().iter().enumerate() {
        let terms = half_cotangents(metric.face_lengths(mesh, f), areas[f]);
        for (&e, t) in fe.iter().zip(terms) {
            weights[e] += t;
        }
    }
    StiffnessMatrix::from_edge_weights(mesh, weights).expect("one weight per edge")
}

/// Cotangent weights from the angles of an embedded mesh.
pub fn cotan_stiffness_from_embedding(mesh: &Mesh, x: &Embedding) -> Result<StiffnessMatrix> {
    x.check_rows(mesh)?;
    let mut weights = vec![0.0; mesh.edge_count()];
    for (f, (face, fe)) in mesh.faces().iter().zip(mesh.face_edges()).enumerate() {
        for a in 0..3 {
            let opp = x.point(face[(a + 2) % 3]);
            let u = x.point(face[a]) - opp;
            let v = x.point(face[(a + 1) % 3]) - opp;
            let sin = u.cross(&v).norm();
            if !(sin > 0.0) {
                return Err(Error::DegenerateTriangle { face: f });
            }
            weights[fe[a]] += 0.5 * u.dot(&v) / sin;
        }
    }
    StiffnessMatrix::from_edge_weights(mesh, weights)
}

/// Conformal energy `1/2 sum_ij (w_ij(l) - wbar_ij) l_ij^2` against reference weights.
pub fn conformal_energy(
    mesh: &Mesh,
    metric: &DiscreteMetric,
    reference: &StiffnessMatrix,
) -> Result<f64> {
    reference.check_size(mesh.vertex_count(), "reference stiffness")?;
    if reference.edges() != mesh.edges() {
        return Err(Error::dims(
            "reference stiffness sparsity",
            "mesh edges",
            "different edge set",
        ));
    }
    let w = stiffness_matrix(mesh, metric)?;
    Ok(0.5
        * w.weights()
            .iter()
            .zip(reference.weights())
            .zip(metric.lengths())
            .map(|((w, wr), l)| (w - wr) * l * l)
            .sum::<f64>())
}
