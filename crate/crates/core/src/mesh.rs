//! Closed manifold triangle-mesh connectivity.
//!
//! A [`Mesh`] is immutable once built. Edges are stored once per unordered vertex pair in
//! lexicographic `(min, max)` order, so edge-indexed vectors (metrics, gradients, weights)
//! have a reproducible layout.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};

/// Vertex triple of an oriented triangle.
pub type Face = [usize; 3];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mesh {
    vertex_count: usize,
    faces: Vec<Face>,
    edges: Vec<[usize; 2]>,
    edge_opposites: Vec<[usize; 2]>,
    edge_faces: Vec<[usize; 2]>,
    face_edges: Vec<[usize; 3]>,
    vertex_faces: Vec<Vec<usize>>,
}

impl Mesh {
    /// Builds the connectivity of a closed manifold triangle mesh.
    ///
    /// Every edge must be shared by exactly two faces. Face orientation is not checked.
    pub fn new(vertex_count: usize, faces: Vec<Face>) -> Result<Self> {
        if vertex_count < 4 {
            return Err(Error::TooFewVertices(vertex_count));
        }
        if faces.is_empty() {
            return Err(Error::NoFaces);
        }

        let mut vertex_faces = vec![Vec::new(); vertex_count];
        for (f, face) in faces.iter().enumerate() {
            for &v in face {
                if v >= vertex_count {
                    return Err(Error::IndexOutOfRange {
                        index: v,
                        bound: vertex_count,
                    });
                }
            }
            let [a, b, c] = *face;
            if a == b || b == c || c == a {
                return Err(Error::DegenerateFace { face: f });
            }
            for &v in face {
                vertex_faces[v].push(f);
            }
        }
        if let Some(v) = vertex_faces.iter().position(Vec::is_empty) {
            return Err(Error::UnreferencedVertex(v));
        }

        // (min, max) -> incident (face, opposite vertex) in face-list order
        let mut incidence: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (f, &[a, b, c]) in faces.iter().enumerate() {
            for (u, v, opp) in [(a, b, c), (b, c, a), (c, a, b)] {
                incidence
                    .entry((u.min(v), u.max(v)))
                    .or_default()
                    .push((f, opp));
            }
        }

        let mut edges = Vec::with_capacity(incidence.len());
        let mut edge_opposites = Vec::with_capacity(incidence.len());
        let mut edge_faces = Vec::with_capacity(incidence.len());
        for (&(i, j), inc) in &incidence {
            if inc.len() != 2 {
                return Err(Error::NonManifoldEdge {
                    i,
                    j,
                    count: inc.len(),
                });
            }
            edges.push([i, j]);
            edge_opposites.push([inc[0].1, inc[1].1]);
            edge_faces.push([inc[0].0, inc[1].0]);
        }

        let index_of = |u: usize, v: usize| -> usize {
            let key = [u.min(v), u.max(v)];
            edges.binary_search(&key).expect("edge registered above")
        };
        let face_edges = faces
            .iter()
            .map(|&[a, b, c]| [index_of(a, b), index_of(b, c), index_of(c, a)])
            .collect();

        Ok(Mesh {
            vertex_count,
            faces,
            edges,
            edge_opposites,
            edge_faces,
            face_edges,
            vertex_faces,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Edges as `[min, max]` vertex pairs in canonical order.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Per face `(i, j, k)`, the edge indices of `ij`, `jk` and `ki`.
    ///
    /// Local edge `a` is therefore opposite local vertex `(a + 2) % 3`.
    pub fn face_edges(&self) -> &[[usize; 3]] {
        &self.face_edges
    }

    /// The two faces incident to each edge, in face-list order.
    pub fn edge_faces(&self) -> &[[usize; 2]] {
        &self.edge_faces
    }

    pub fn vertex_faces(&self, vertex: usize) -> &[usize] {
        &self.vertex_faces[vertex]
    }

    /// Index of the edge joining `u` and `v`, if there is one.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&[u.min(v), u.max(v)]).ok()
    }

    /// The vertices opposite `edge` in its two incident faces, in face-list order.
    pub fn edge_opposite_vertices(&self, edge: usize) -> Result<(usize, usize)> {
        let [k, h] = *self.edge_opposites.get(edge).ok_or(Error::IndexOutOfRange {
            index: edge,
            bound: self.edges.len(),
        })?;
        Ok((k, h))
    }

    /// Breadth-first check over the edge graph.
    pub fn is_connected(&self) -> bool {
        let mut adjacency = vec![Vec::new(); self.vertex_count];
        for &[i, j] in &self.edges {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    queue.push_back(u);
                }
            }
        }
        reached == self.vertex_count
    }
}
