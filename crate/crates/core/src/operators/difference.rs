use nalgebra::DMatrix;

use super::{pseudoinverse, MassMatrix, StiffnessMatrix};
use crate::error::{Error, Result};

/// Dense `m x n` matrix carrying functions on a source shape (n vertices) to a target
/// shape (m vertices).
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalMap {
    matrix: DMatrix<f64>,
}

impl FunctionalMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "functional map has non-finite entries".into(),
            ));
        }
        Ok(FunctionalMap { matrix })
    }

    pub fn identity(n: usize) -> Self {
        FunctionalMap {
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn target_size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn source_size(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (&self.matrix * nalgebra::DVector::from_column_slice(f))
            .iter()
            .copied()
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DifferenceKind {
    AreaBased,
    Conformal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDifference {
    pub matrix: DMatrix<f64>,
    pub kind: DifferenceKind,
}

fn check_map(f: &FunctionalMap, source: usize, target: usize) -> Result<()> {
    if f.source_size() != source || f.target_size() != target {
        return Err(Error::dims(
            "functional map",
            format!("{target}x{source}"),
            format!("{}x{}", f.target_size(), f.source_size()),
        ));
    }
    Ok(())
}

/// `V = A_X^-1 F^T A_Y F`.
pub fn area_difference(
    mass_x: &MassMatrix,
    mass_y: &MassMatrix,
    f: &FunctionalMap,
) -> Result<ShapeDifference> {
    check_map(f, mass_x.len(), mass_y.len())?;
    let fm = f.matrix();
    let mut weighted = fm.clone();
    for (mut row, &a) in weighted.row_iter_mut().zip(mass_y.diag()) {
        row *= a;
    }
    let mut v = fm.tr_mul(&weighted);
    for (mut row, &a) in v.row_iter_mut().zip(mass_x.diag()) {
        row.apply(|x| *x /= a);
    }
    Ok(ShapeDifference {
        matrix: v,
        kind: DifferenceKind::AreaBased,
    })
}

/// `R = W_X^+ F^T W_Y F`.
pub fn conformal_difference(
    stiffness_x: &StiffnessMatrix,
    stiffness_y: &StiffnessMatrix,
    f: &FunctionalMap,
    rel_tol: f64,
) -> Result<ShapeDifference> {
    check_map(f, stiffness_x.size(), stiffness_y.size())?;
    let pinv = pseudoinverse(stiffness_x, rel_tol)?;
    let inner = f.matrix().tr_mul(&stiffness_y.mul_dense(f.matrix()));
    Ok(ShapeDifference {
        matrix: pinv * inner,
        kind: DifferenceKind::Conformal,
    })
}

/// Eigenbases and masses used to project a functional map onto the first `K` eigenfunctions.
#[derive(Debug, Clone)]
pub struct SpectralTruncation<'a> {
    /// Source eigenbasis, `n x K`.
    pub basis_x: &'a DMatrix<f64>,
    pub mass_x: &'a MassMatrix,
    /// Target eigenbasis, `m x K'`.
    pub basis_y: &'a DMatrix<f64>,
    pub mass_y: &'a MassMatrix,
}

/// Functional map of a point map `t` from target vertices into `0..n` source vertices.
///
/// Without truncation this is the row selector `F[y, t[y]] = 1`. With truncation the
/// selector is compressed to `C = Phi_Y^T A_Y F Phi_X` and expanded back as
/// `Phi_Y C Phi_X^T A_X`.
pub fn functional_map_from_point_map(
    t: &[usize],
    n: usize,
    truncation: Option<SpectralTruncation<'_>>,
) -> Result<FunctionalMap> {
    let m = t.len();
    let mut f = DMatrix::zeros(m, n);
    for (y, &x) in t.iter().enumerate() {
        if x >= n {
            return Err(Error::IndexOutOfRange { index: x, bound: n });
        }
        f[(y, x)] = 1.0;
    }
    let Some(tr) = truncation else {
        return Ok(FunctionalMap { matrix: f });
    };
    if tr.basis_x.nrows() != n || tr.mass_x.len() != n {
        return Err(Error::dims("source eigenbasis rows", n, tr.basis_x.nrows()));
    }
    if tr.basis_y.nrows() != m || tr.mass_y.len() != m {
        return Err(Error::dims("target eigenbasis rows", m, tr.basis_y.nrows()));
    }
    let mut ay_phi_y = tr.basis_y.clone();
    for (mut row, &a) in ay_phi_y.row_iter_mut().zip(tr.mass_y.diag()) {
        row *= a;
    }
    let c = ay_phi_y.tr_mul(&(&f * tr.basis_x));
    let mut ax_phi_x = tr.basis_x.clone();
    for (mut row, &a) in ax_phi_x.row_iter_mut().zip(tr.mass_x.diag()) {
        row *= a;
    }
    let matrix = tr.basis_y * c * ax_phi_x.transpose();
    Ok(FunctionalMap { matrix })
}
