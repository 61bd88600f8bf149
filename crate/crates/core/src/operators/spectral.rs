use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{mass_matrix, stiffness_matrix, StiffnessMatrix};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::metric::DiscreteMetric;

fn symmetric_eigen(m: DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let n = m.nrows();
    SymmetricEigen::try_new(m, f64::EPSILON, 1000 * n.max(1))
        .ok_or_else(|| Error::EigensolverFailure(format!("no convergence for {n}x{n} matrix")))
}

/// Moore-Penrose pseudoinverse of a symmetric matrix through its eigendecomposition.
///
/// Eigenvalues with magnitude at most `rel_tol * max|lambda|` are treated as zero.
pub fn pseudoinverse_symmetric(m: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::dims(
            "pseudoinverse",
            "square matrix",
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    let eig = symmetric_eigen(m.clone())?;
    let cutoff = rel_tol * eig.eigenvalues.amax();
    let inv = eig
        .eigenvalues
        .map(|v| if v.abs() > cutoff { 1.0 / v } else { 0.0 });
    let q = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(q.nrows(), q.ncols(), |i, j| q[(i, j)] * inv[j]);
    let p = scaled * q.transpose();
    // symmetrize away round-off
    Ok((&p + p.transpose()) * 0.5)
}

/// Pseudoinverse of a stiffness matrix.
pub fn pseudoinverse(w: &StiffnessMatrix, rel_tol: f64) -> Result<DMatrix<f64>> {
    pseudoinverse_symmetric(&w.to_dense(), rel_tol)
}

/// The first `K` Laplace-Beltrami eigenpairs, `A`-orthonormal, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigenbasis {
    /// `n x K`, one eigenfunction per column.
    pub vectors: DMatrix<f64>,
    pub values: Vec<f64>,
}

/// Solves `-W phi = lambda A phi` for the `k` smallest eigenvalues.
///
/// The stiffness matrix has positive off-diagonal weights, so `-W` is the positive
/// semidefinite side of the pencil. Each eigenvector's sign is fixed so that its
/// largest-magnitude entry is positive.
pub fn lb_eigenbasis(mesh: &Mesh, metric: &DiscreteMetric, k: usize) -> Result<Eigenbasis> {
    let n = mesh.vertex_count();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "eigenbasis size must be in 1..={n}, got {k}"
        )));
    }
    let a = mass_matrix(mesh, metric)?;
    let w = stiffness_matrix(mesh, metric)?;
    let inv_sqrt: Vec<f64> = a.diag().iter().map(|x| 1.0 / x.sqrt()).collect();
    let mut m = -w.to_dense();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let m = (&m + m.transpose()) * 0.5;
    let eig = symmetric_eigen(m)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));

    let mut vectors = DMatrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    for (c, &src) in order.iter().take(k).enumerate() {
        let mut v = DVector::from_fn(n, |i, _| eig.eigenvectors[(i, src)] * inv_sqrt[i]);
        let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(c, &v);
        values.push(eig.eigenvalues[src]);
    }
    Ok(Eigenbasis { vectors, values })
}
