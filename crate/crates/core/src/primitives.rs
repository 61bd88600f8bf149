//! Closed test meshes: platonic solids, subdivided icospheres and tori.

use std::collections::HashMap;

use crate::geometry::{Embedding, Point};
use crate::mesh::{Face, Mesh};

fn build(points: Vec<Point>, faces: Vec<Face>) -> (Mesh, Embedding) {
    let mesh = Mesh::new(points.len(), faces).expect("primitive meshes are closed manifolds");
    let x = Embedding::new(points).expect("finite coordinates");
    (mesh, x)
}

/// Regular tetrahedron with unit edge length, faces `(0,1,2) (0,3,1) (1,3,2) (2,3,0)`.
pub fn regular_tetrahedron() -> (Mesh, Embedding) {
    let s = 1.0 / (2.0 * 2f64.sqrt());
    let points = vec![
        Point::new(s, s, s),
        Point::new(s, -s, -s),
        Point::new(-s, s, -s),
        Point::new(-s, -s, s),
    ];
    build(points, vec![[0, 1, 2], [0, 3, 1], [1, 3, 2], [2, 3, 0]])
}

pub fn octahedron() -> (Mesh, Embedding) {
    let points = vec![
        Point::new(1.0, 0.0, 0.0),
        Point::new(-1.0, 0.0, 0.0),
        Point::new(0.0, 1.0, 0.0),
        Point::new(0.0, -1.0, 0.0),
        Point::new(0.0, 0.0, 1.0),
        Point::new(0.0, 0.0, -1.0),
    ];
    let faces = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    build(points, faces)
}

fn icosahedron_data() -> (Vec<Point>, Vec<Face>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let points = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|p| Point::new(p[0], p[1], p[2]).normalize())
    .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (points, faces)
}

pub fn icosahedron() -> (Mesh, Embedding) {
    let (points, faces) = icosahedron_data();
    build(points, faces)
}

/// Unit icosphere after `level` rounds of 1-to-4 subdivision: `10 * 4^level + 2` vertices.
pub fn icosphere(level: u32) -> (Mesh, Embedding) {
    let (mut points, mut faces) = icosahedron_data();
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, points: &mut Vec<Point>| {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                points.push(((points[a] + points[b]) * 0.5).normalize());
                points.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut points);
            let bc = midpoint(b, c, &mut points);
            let ca = midpoint(c, a, &mut points);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    build(points, faces)
}

/// Torus sampled on a `major x minor` grid; both counts must be at least 3.
pub fn torus(major: usize, minor: usize, major_radius: f64, minor_radius: f64) -> (Mesh, Embedding) {
    assert!(major >= 3 && minor >= 3, "torus grid needs at least 3x3 samples");
    let tau = std::f64::consts::TAU;
    let mut points = Vec::with_capacity(major * minor);
    for u in 0..major {
        let theta = tau * u as f64 / major as f64;
        for v in 0..minor {
            let phi = tau * v as f64 / minor as f64;
            let r = major_radius + minor_radius * phi.cos();
            points.push(Point::new(r * theta.cos(), r * theta.sin(), minor_radius * phi.sin()));
        }
    }
    let idx = |u: usize, v: usize| (u % major) * minor + (v % minor);
    let mut faces = Vec::with_capacity(2 * major * minor);
    for u in 0..major {
        for v in 0..minor {
            let (a, b, c, d) = (idx(u, v), idx(u + 1, v), idx(u + 1, v + 1), idx(u, v + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    build(points, faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        for (mesh, x) in [
            regular_tetrahedron(),
            octahedron(),
            icosahedron(),
            icosphere(1),
            icosphere(2),
            torus(6, 4, 2.0, 0.7),
        ] {
            assert_eq!(mesh.vertex_count(), x.len());
            assert_eq!(3 * mesh.face_count(), 2 * mesh.edge_count());
            // Euler characteristic 2 for spheres, 0 for the torus
            let chi = mesh.vertex_count() as i64 - mesh.edge_count() as i64 + mesh.face_count() as i64;
            assert!(chi == 2 || chi == 0);
            assert!(mesh.is_connected());
        }
        assert_eq!(icosphere(2).0.vertex_count(), 162);
    }

    #[test]
    fn tetrahedron_edges_unit() {
        let (mesh, x) = regular_tetrahedron();
        for &[i, j] in mesh.edges() {
            assert!(((x.point(i) - x.point(j)).norm() - 1.0).abs() < 1e-15);
        }
    }
}
