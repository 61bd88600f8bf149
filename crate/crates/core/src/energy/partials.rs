//! Derivatives of face areas, lumped masses and cotangent weights with respect to edge lengths.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::metric::{face_areas, triangle_area, DiscreteMetric};

/// `dA/dx` for a triangle with sides `(x, y, z)` and area `area`.
fn gamma(x: f64, y: f64, z: f64, area: f64) -> f64 {
    let s = 0.5 * (x + y + z);
    let (sx, sy, sz) = (s - x, s - y, s - z);
    (sx * sy * sz + s * sx * sy + s * sx * sz - s * sy * sz) / (4.0 * area)
}

pub(crate) fn area_partials_with_area(l: [f64; 3], area: f64) -> [f64; 3] {
    let [a, b, c] = l;
    [gamma(a, b, c, area), gamma(b, a, c, area), gamma(c, a, b, area)]
}

/// Partial derivatives of the Heron area with respect to each of the three side lengths.
pub fn area_partials(l: [f64; 3]) -> Result<[f64; 3]> {
    let area = triangle_area(l[0], l[1], l[2])?;
    Ok(area_partials_with_area(l, area))
}

/// `d t_a / d l_b` for the half-cotangent terms `t_a = (-l_a^2 + l_b^2 + l_c^2) / (8A)` of one
/// face, indexed `[a][b]` over local edges.
pub(crate) fn half_cotangent_partials(l: [f64; 3], area: f64) -> [[f64; 3]; 3] {
    let d_area = area_partials_with_area(l, area);
    let sq = l.map(|x| x * x);
    let denom = 8.0 * area;
    let mut out = [[0.0; 3]; 3];
    for a in 0..3 {
        let t = (-sq[a] + sq[(a + 1) % 3] + sq[(a + 2) % 3]) / denom;
        for b in 0..3 {
            let numer = if a == b { -2.0 * l[b] } else { 2.0 * l[b] };
            out[a][b] = numer / denom - t * d_area[b] / area;
        }
    }
    out
}

/// Sparse `n x |E|` Jacobian of the lumped masses, as `(vertex, edge) -> da_vertex/dl_edge`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassPartials {
    pub entries: BTreeMap<(usize, usize), f64>,
}

impl MassPartials {
    pub fn get(&self, vertex: usize, edge: usize) -> f64 {
        self.entries.get(&(vertex, edge)).copied().unwrap_or(0.0)
    }
}

pub fn mass_partials(mesh: &Mesh, metric: &DiscreteMetric) -> Result<MassPartials> {
    let areas = face_areas(mesh, metric)?;
    let mut entries = BTreeMap::new();
    for (f, (face, fe)) in mesh.faces().iter().zip(mesh.face_edges()).enumerate() {
        let d = area_partials_with_area(metric.face_lengths(mesh, f), areas[f]);
        for (&e, de) in fe.iter().zip(d) {
            for &v in face {
                *entries.entry((v, e)).or_insert(0.0) += de / 3.0;
            }
        }
    }
    Ok(MassPartials { entries })
}

/// Sparse Jacobian of the off-diagonal cotangent weights, as
/// `(weight edge, length edge) -> dw/dl`. Diagonal entries follow from zero row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessPartials {
    edges: Vec<[usize; 2]>,
    pub entries: BTreeMap<(usize, usize), f64>,
}

impl StiffnessPartials {
    /// `d w_ij / d l_e` for the weight stored on edge `weight_edge`.
    pub fn get(&self, weight_edge: usize, length_edge: usize) -> f64 {
        self.entries
            .get(&(weight_edge, length_edge))
            .copied()
            .unwrap_or(0.0)
    }

    /// `d w_ij / d l_e` for arbitrary `i != j`; zero when `ij` is not an edge.
    pub fn off_diagonal(&self, i: usize, j: usize, length_edge: usize) -> f64 {
        match self.edges.binary_search(&[i.min(j), i.max(j)]) {
            Ok(w) => self.get(w, length_edge),
            Err(_) => 0.0,
        }
    }

    /// `d w_ii / d l_e = -sum_j d w_ij / d l_e`.
    pub fn diagonal(&self, vertex: usize, length_edge: usize) -> f64 {
        -self
            .entries
            .iter()
            .filter(|((w, e), _)| *e == length_edge && self.edges[*w].contains(&vertex))
            .map(|(_, v)| v)
            .sum::<f64>()
    }
}

pub fn stiffness_partials(mesh: &Mesh, metric: &DiscreteMetric) -> Result<StiffnessPartials> {
    let areas = face_areas(mesh, metric)?;
    let mut entries = BTreeMap::new();
    for (f, fe) in mesh.face_edges().iter().enumerate() {
        let d = half_cotangent_partials(metric.face_lengths(mesh, f), areas[f]);
        for a in 0..3 {
            for b in 0..3 {
                *entries.entry((fe[a], fe[b])).or_insert(0.0) += d[a][b];
            }
        }
    }
    Ok(StiffnessPartials {
        edges: mesh.edges().to_vec(),
        entries,
    })
}

pub(crate) fn invalid_metric(err: Error) -> Error {
    match err {
        Error::InvalidTriangle { face: Some(face) } => Error::InvalidMetric { face },
        other => other,
    }
}
