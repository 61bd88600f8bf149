use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::Embedding;
use crate::mesh::Mesh;
use crate::metric::DiscreteMetric;
use crate::operators::{pseudoinverse_symmetric, DEFAULT_PINV_REL_TOL};

/// Edge-graph Laplacian `Z` and its pseudoinverse, which depend on connectivity only.
#[derive(Debug, Clone)]
pub struct SmacofMatrices {
    pub z: DMatrix<f64>,
    pub z_pinv: DMatrix<f64>,
}

pub fn smacof_matrices(mesh: &Mesh) -> Result<SmacofMatrices> {
    if !mesh.is_connected() {
        return Err(Error::DisconnectedMesh);
    }
    let n = mesh.vertex_count();
    let mut z = DMatrix::zeros(n, n);
    for &[i, j] in mesh.edges() {
        z[(i, j)] = -1.0;
        z[(j, i)] = -1.0;
        z[(i, i)] += 1.0;
        z[(j, j)] += 1.0;
    }
    let z_pinv = pseudoinverse_symmetric(&z, DEFAULT_PINV_REL_TOL)?;
    Ok(SmacofMatrices { z, z_pinv })
}

/// `sum_ij (|x_i - x_j| - l_ij)^2` over mesh edges.
pub fn stress(mesh: &Mesh, metric: &DiscreteMetric, x: &Embedding) -> f64 {
    mesh.edges()
        .iter()
        .zip(metric.lengths())
        .map(|(&[i, j], l)| {
            let d = (x.point(i) - x.point(j)).norm() - l;
            d * d
        })
        .sum()
}

/// One Guttman transform `X <- Z^+ B(X) X`. Coincident endpoints contribute nothing to `B`.
pub fn smacof_step(mesh: &Mesh, metric: &DiscreteMetric, x: &Embedding, z_pinv: &DMatrix<f64>) -> Embedding {
    let n = mesh.vertex_count();
    let mut bx = DMatrix::zeros(n, 3);
    for (&[i, j], &l) in mesh.edges().iter().zip(metric.lengths()) {
        let diff = x.point(i) - x.point(j);
        let d = diff.norm();
        if d == 0.0 {
            continue;
        }
        let contrib = diff * (l / d);
        for c in 0..3 {
            bx[(i, c)] += contrib[c];
            bx[(j, c)] -= contrib[c];
        }
    }
    Embedding::from_matrix(&(z_pinv * bx))
}

/// Runs `iterations` SMACOF steps from `x0`; returns the final embedding and the stress
/// after each step.
pub fn smacof(
    mesh: &Mesh,
    metric: &DiscreteMetric,
    x0: &Embedding,
    iterations: usize,
    matrices: &SmacofMatrices,
) -> Result<(Embedding, Vec<f64>)> {
    x0.check_rows(mesh)?;
    if metric.len() != mesh.edge_count() {
        return Err(Error::dims("metric length", mesh.edge_count(), metric.len()));
    }
    if matrices.z_pinv.nrows() != mesh.vertex_count() {
        return Err(Error::dims("SMACOF matrices", mesh.vertex_count(), matrices.z_pinv.nrows()));
    }
    let mut x = x0.clone();
    let mut stresses = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        x = smacof_step(mesh, metric, &x, &matrices.z_pinv);
        stresses.push(stress(mesh, metric, &x));
    }
    Ok((x, stresses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::metric_from_embedding;
    use crate::primitives;
    use crate::testing::{jittered, random_valid_metric};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn centering(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64)
    }

    #[test]
    fn tetrahedron_matrices() {
        let (mesh, _) = primitives::regular_tetrahedron();
        let m = smacof_matrices(&mesh).unwrap();
        let expected_z = DMatrix::from_fn(4, 4, |i, j| if i == j { 3.0 } else { -1.0 });
        assert_eq!(m.z, expected_z);
        assert!((&m.z_pinv * &m.z - centering(4)).amax() < 1e-12);
        assert!((&m.z_pinv - centering(4) * 0.25).amax() < 1e-12);
        let ones = nalgebra::DVector::from_element(4, 1.0);
        assert!((&m.z * ones).amax() == 0.0);
    }

    #[test]
    fn penrose_identities() {
        let (mesh, _) = primitives::icosphere(2);
        let m = smacof_matrices(&mesh).unwrap();
        let n = mesh.vertex_count();
        assert!((&m.z_pinv * &m.z - centering(n)).amax() < 1e-10);
        assert!((&m.z * &m.z_pinv - centering(n)).amax() < 1e-10);
    }

    #[test]
    fn disconnected_rejected() {
        let mut faces = vec![[0, 1, 2], [0, 3, 1], [1, 3, 2], [2, 3, 0]];
        faces.extend([[4, 5, 6], [4, 7, 5], [5, 7, 6], [6, 7, 4]]);
        let mesh = Mesh::new(8, faces).unwrap();
        assert!(matches!(smacof_matrices(&mesh), Err(Error::DisconnectedMesh)));
    }

    #[test]
    fn realizing_embedding_is_a_fixed_point() {
        let (mesh, x) = primitives::icosphere(1);
        let x = jittered(&x, 0.02, 1);
        let l = metric_from_embedding(&mesh, &x).unwrap();
        assert_eq!(stress(&mesh, &l, &x), 0.0);
        let m = smacof_matrices(&mesh).unwrap();
        let (y, stresses) = smacof(&mesh, &l, &x, 5, &m).unwrap();
        assert_eq!(stresses.len(), 5);
        assert!(stresses.iter().all(|&s| s < 1e-24));
        let c = x.centered();
        for (p, q) in y.points().iter().zip(c.points()) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn coincident_points_are_tolerated() {
        let (mesh, x) = primitives::regular_tetrahedron();
        let l = metric_from_embedding(&mesh, &x).unwrap();
        let mut rows = x.to_rows();
        rows[1] = rows[0];
        let x = Embedding::from_rows(&rows).unwrap();
        let m = smacof_matrices(&mesh).unwrap();
        let y = smacof_step(&mesh, &l, &x, &m.z_pinv);
        assert!(y.points().iter().all(|p| p.iter().all(|c| c.is_finite())));
        assert!(stress(&mesh, &l, &y) <= stress(&mesh, &l, &x));
    }

    #[test]
    fn output_is_centered_and_stress_monotone() {
        let (mesh, x) = primitives::torus(8, 5, 2.0, 0.7);
        let m = smacof_matrices(&mesh).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = random_valid_metric(&mesh, &x, 0.2, &mut rng);
        let x0 = jittered(&x, 0.3, 3);
        let mut prev = stress(&mesh, &l, &x0);
        let mut cur = x0;
        for _ in 0..20 {
            cur = smacof_step(&mesh, &l, &cur, &m.z_pinv);
            assert!(cur.centroid().norm() < 1e-12);
            let s = stress(&mesh, &l, &cur);
            assert!(s <= prev + 1e-12 * (1.0 + prev));
            prev = s;
        }
    }

    #[test]
    fn tetrahedron_recovered_from_random_start() {
        let (mesh, x) = primitives::regular_tetrahedron();
        let l = metric_from_embedding(&mesh, &x).unwrap();
        let m = smacof_matrices(&mesh).unwrap();
        for seed in 0..10 {
            let x0 = jittered(&Embedding::from_rows(&[[0.0; 3]; 4]).unwrap(), 1.0, seed);
            let (_, stresses) = smacof(&mesh, &l, &x0, 200, &m).unwrap();
            assert!(*stresses.last().unwrap() < 1e-6, "seed {seed}: {:?}", stresses.last());
        }
    }

    #[test]
    fn stress_rigid_invariance() {
        let (mesh, x) = primitives::icosphere(1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = random_valid_metric(&mesh, &x, 0.1, &mut rng);
        let rot = nalgebra::Rotation3::from_euler_angles(0.4, 0.1, -0.7);
        let moved = Embedding::new(x.points().iter().map(|p| rot * p + nalgebra::Vector3::new(3.0, 0.0, 1.0)).collect()).unwrap();
        assert!((stress(&mesh, &l, &x) - stress(&mesh, &l, &moved)).abs() < 1e-12);
    }

    #[test]
    fn stress_matches_direct_sum() {
        let (mesh, x) = primitives::regular_tetrahedron();
        let l = DiscreteMetric::new(&mesh, vec![1.0, 1.2, 0.9, 1.1, 1.0, 0.8]).unwrap();
        let rows = x.to_rows();
        let mut oracle = 0.0;
        for (e, &[i, j]) in mesh.edges().iter().enumerate() {
            let d = ((rows[i][0] - rows[j][0]).powi(2) + (rows[i][1] - rows[j][1]).powi(2) + (rows[i][2] - rows[j][2]).powi(2)).sqrt();
            oracle += (d - l.lengths()[e]).powi(2);
        }
        assert!((stress(&mesh, &l, &x) - oracle).abs() < 1e-15);
    }
}
