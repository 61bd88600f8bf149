use nalgebra::DMatrix;

use super::{EnergyTerm, Operand, SfoEnergySpec};
use crate::error::{Error, Result};
use crate::operators::{
    pseudoinverse, FunctionalMap, MassMatrix, ShapeDifference, StiffnessMatrix,
};

/// `|W(l) F - W_B F|^2`: `lambda = 0`, `H2 = I`, `K2 = F`, `J2 = W_B F`.
///
/// `F` has one row per vertex of the mesh being deformed and `W_B` is expressed on those
/// vertices. The map need not be bijective or full rank.
pub fn make_shape_from_laplacian_spec(
    f: &FunctionalMap,
    target_stiffness: &DMatrix<f64>,
) -> Result<SfoEnergySpec> {
    let n = f.target_size();
    if target_stiffness.shape() != (n, n) {
        return Err(Error::dims(
            "target stiffness",
            format!("{n}x{n}"),
            format!("{}x{}", target_stiffness.nrows(), target_stiffness.ncols()),
        ));
    }
    let j = target_stiffness * f.matrix();
    let term = EnergyTerm::new(
        Operand::Identity(n),
        Operand::from_dense(f.matrix().clone()),
        j,
    )?;
    SfoEnergySpec::new(0.0, None, Some(term))
}

/// Shape-from-difference energy on shape `C`:
/// `lambda |A_C^-1 A(l) G - G V_AB|^2 + (1 - lambda) |W_C^+ W(l) G - G R_AB|^2`.
///
/// `G` maps functions on `A` to functions on `C` (`n_C x n_A`).
#[allow(clippy::too_many_arguments)]
pub fn make_shape_from_difference_spec(
    mass_c: &MassMatrix,
    stiffness_c: &StiffnessMatrix,
    g: &FunctionalMap,
    area_diff: &ShapeDifference,
    conformal_diff: &ShapeDifference,
    lambda: f64,
    rel_tol: f64,
) -> Result<SfoEnergySpec> {
    let n_c = mass_c.len();
    let n_a = g.source_size();
    stiffness_c.check_size(n_c, "stiffness of C")?;
    if g.target_size() != n_c {
        return Err(Error::dims("map G rows", n_c, g.target_size()));
    }
    for (d, name) in [(area_diff, "area difference"), (conformal_diff, "conformal difference")] {
        if d.matrix.shape() != (n_a, n_a) {
            return Err(Error::dims(
                name,
                format!("{n_a}x{n_a}"),
                format!("{}x{}", d.matrix.nrows(), d.matrix.ncols()),
            ));
        }
    }
    let k = Operand::from_dense(g.matrix().clone());
    let area = EnergyTerm::new(
        Operand::Diagonal(mass_c.diag().iter().map(|a| 1.0 / a).collect()),
        k.clone(),
        g.matrix() * &area_diff.matrix,
    )?;
    let stiffness = EnergyTerm::new(
        Operand::Dense(pseudoinverse(stiffness_c, rel_tol)?),
        k,
        g.matrix() * &conformal_diff.matrix,
    )?;
    SfoEnergySpec::new(lambda, Some(area), Some(stiffness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{evaluate, sfo_energy};
    use crate::metric::{metric_from_embedding, DiscreteMetric};
    use crate::operators::{
        area_difference, conformal_difference, functional_map_from_point_map, lb_eigenbasis,
        mass_matrix, stiffness_matrix, SpectralTruncation,
    };
    use crate::primitives;
    use crate::testing::{jittered, random_valid_metric};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn laplacian_spec_zero_at_target() {
        let (mesh, x) = primitives::icosphere(1);
        let l = metric_from_embedding(&mesh, &x).unwrap();
        let n = mesh.vertex_count();
        let w = stiffness_matrix(&mesh, &l).unwrap().to_dense();
        let spec = make_shape_from_laplacian_spec(&FunctionalMap::identity(n), &w).unwrap();
        assert_eq!(spec.lambda(), 0.0);
        assert!(sfo_energy(&spec, &mesh, &l).unwrap() < 1e-26);
    }

    #[test]
    fn laplacian_spec_matches_direct_frobenius() {
        let (mesh, x) = primitives::icosphere(1);
        let n = mesh.vertex_count();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = random_valid_metric(&mesh, &x, 0.1, &mut rng);
        let target = stiffness_matrix(&mesh, &metric_from_embedding(&mesh, &x).unwrap()).unwrap().to_dense();
        let t: Vec<usize> = (0..n).map(|i| (i * 5 + 1) % n).collect();
        let f = functional_map_from_point_map(&t, n, None).unwrap();
        let spec = make_shape_from_laplacian_spec(&f, &target).unwrap();
        let w = stiffness_matrix(&mesh, &l).unwrap().to_dense();
        let oracle = (&w * f.matrix() - &target * f.matrix()).norm_squared();
        let e = sfo_energy(&spec, &mesh, &l).unwrap();
        assert!((e - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn laplacian_spec_accepts_truncated_map() {
        let (mesh, x) = primitives::icosphere(1);
        let n = mesh.vertex_count();
        let l = metric_from_embedding(&mesh, &x).unwrap();
        let basis = lb_eigenbasis(&mesh, &l, 10).unwrap();
        let a = mass_matrix(&mesh, &l).unwrap();
        let t: Vec<usize> = (0..n).collect();
        let f = functional_map_from_point_map(
            &t,
            n,
            Some(SpectralTruncation { basis_x: &basis.vectors, mass_x: &a, basis_y: &basis.vectors, mass_y: &a }),
        )
        .unwrap();
        let w = stiffness_matrix(&mesh, &l).unwrap().to_dense();
        let spec = make_shape_from_laplacian_spec(&f, &w).unwrap();
        assert!(sfo_energy(&spec, &mesh, &l).unwrap() < 1e-20);
    }

    #[test]
    fn laplacian_spec_dimension_mismatch() {
        let f = FunctionalMap::identity(5);
        assert!(matches!(
            make_shape_from_laplacian_spec(&f, &DMatrix::zeros(4, 4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn self_difference_has_zero_energy() {
        let (mesh, x) = primitives::icosphere(1);
        let x = jittered(&x, 0.03, 1);
        let l = metric_from_embedding(&mesh, &x).unwrap();
        let n = mesh.vertex_count();
        let (a, w) = (mass_matrix(&mesh, &l).unwrap(), stiffness_matrix(&mesh, &l).unwrap());
        let id = FunctionalMap::identity(n);
        let v = area_difference(&a, &a, &id).unwrap();
        let r = conformal_difference(&w, &w, &id, 1e-10).unwrap();
        let spec = make_shape_from_difference_spec(&a, &w, &id, &v, &r, 0.5, 1e-10).unwrap();
        let eval = evaluate(&spec, &mesh, &l).unwrap();
        assert!(eval.area_residual.unwrap().amax() < 1e-14);
        assert!(eval.stiffness_residual.unwrap().amax() < 1e-10);
    }

    #[test]
    fn difference_spec_matches_direct_frobenius() {
        let (mesh, x) = primitives::icosphere(1);
        let n = mesh.vertex_count();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let lc = metric_from_embedding(&mesh, &x).unwrap();
        let la = random_valid_metric(&mesh, &x, 0.05, &mut rng);
        let lb = random_valid_metric(&mesh, &x, 0.05, &mut rng);
        let lx = random_valid_metric(&mesh, &x, 0.05, &mut rng);
        let op = |l: &DiscreteMetric| (mass_matrix(&mesh, l).unwrap(), stiffness_matrix(&mesh, l).unwrap());
        let ((aa, wa), (ab, wb), (ac, wc)) = (op(&la), op(&lb), op(&lc));
        let id = FunctionalMap::identity(n);
        let v = area_difference(&aa, &ab, &id).unwrap();
        let r = conformal_difference(&wa, &wb, &id, 1e-10).unwrap();
        let lambda = 0.4;
        let spec = make_shape_from_difference_spec(&ac, &wc, &id, &v, &r, lambda, 1e-10).unwrap();

        let (ax, wx) = op(&lx);
        let wc_pinv = pseudoinverse(&wc, 1e-10).unwrap();
        let inv_ac = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / ac.diag()[i] } else { 0.0 });
        let e1 = (inv_ac * ax.to_dense() - &v.matrix).norm_squared();
        let e2 = (wc_pinv * wx.to_dense() - &r.matrix).norm_squared();
        let oracle = lambda * e1 + (1.0 - lambda) * e2;
        let e = sfo_energy(&spec, &mesh, &lx).unwrap();
        assert!((e - oracle).abs() <= 1e-10 * oracle, "{e} vs {oracle}");
    }

}
