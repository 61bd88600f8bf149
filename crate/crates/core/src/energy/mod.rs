//! The shape-from-operator energy
//!
//! ```text
//! E(l) = lambda * |H1 A(l) K1 - J1|_F^2 + (1 - lambda) * |H2 W(l) K2 - J2|_F^2
//! ```
//!
//! and its gradient with respect to the edge lengths `l`.
//!
//! The gradient is assembled face by face. For a term `|H Q K - J|^2` the outer factor is
//! `M = 2 H^T (H Q K - J) K^T`; only its diagonal and its entries on mesh edges are needed,
//! because `dA/dl` is diagonal and `dW/dl` lives on the sparsity pattern of the mesh.

mod builders;
mod partials;

pub use builders::{make_shape_from_difference_spec, make_shape_from_laplacian_spec};
pub use partials::{
    area_partials, mass_partials, stiffness_partials, MassPartials, StiffnessPartials,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::metric::{face_areas, first_invalid_face, DiscreteMetric};
use crate::operators::{
    mass_from_face_areas, stiffness_from_face_areas, MassMatrix, StiffnessMatrix,
};
use partials::{area_partials_with_area, half_cotangent_partials, invalid_metric};

/// Default weight between the area and stiffness terms.
pub const DEFAULT_LAMBDA: f64 = 0.5;

/// A fixed matrix factor of an energy term. Identity and diagonal factors are kept
/// implicit so products with them cost nothing.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Identity(usize),
    Diagonal(Vec<f64>),
    Dense(DMatrix<f64>),
}

impl Operand {
    pub fn rows(&self) -> usize {
        match self {
            Operand::Identity(n) => *n,
            Operand::Diagonal(d) => d.len(),
            Operand::Dense(m) => m.nrows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Operand::Identity(n) => *n,
            Operand::Diagonal(d) => d.len(),
            Operand::Dense(m) => m.ncols(),
        }
    }

    /// Dense matrix that is exactly the identity becomes [`Operand::Identity`].
    pub fn from_dense(m: DMatrix<f64>) -> Self {
        if m.is_square() && m == DMatrix::identity(m.nrows(), m.ncols()) {
            Operand::Identity(m.nrows())
        } else {
            Operand::Dense(m)
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Operand::Identity(n) => DMatrix::identity(*n, *n),
            Operand::Diagonal(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)),
            Operand::Dense(m) => m.clone(),
        }
    }

    /// `self * m`.
    fn mul(&self, m: DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Operand::Identity(_) => m,
            Operand::Diagonal(d) => scale_rows(m, d),
            Operand::Dense(h) => h * m,
        }
    }

    /// `self^T * m`.
    fn tr_mul(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Operand::Identity(_) => m.clone(),
            Operand::Diagonal(d) => scale_rows(m.clone(), d),
            Operand::Dense(h) => h.tr_mul(m),
        }
    }

    /// `(p * self^T)[i, j]`, i.e. row `i` of `p` against row `j` of `self`.
    fn row_dot(&self, p: &DMatrix<f64>, i: usize, j: usize) -> f64 {
        match self {
            Operand::Identity(_) => p[(i, j)],
            Operand::Diagonal(d) => p[(i, j)] * d[j],
            Operand::Dense(k) => p.row(i).dot(&k.row(j)),
        }
    }
}

fn scale_rows(mut m: DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    for (mut row, s) in m.row_iter_mut().zip(d) {
        row *= *s;
    }
    m
}

/// One `|H Q K - J|_F^2` term: `H` is `m x n`, `K` is `n x l`, `J` is `m x l`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTerm {
    pub h: Operand,
    pub k: Operand,
    pub j: DMatrix<f64>,
}

impl EnergyTerm {
    pub fn new(h: Operand, k: Operand, j: DMatrix<f64>) -> Result<Self> {
        if h.cols() != k.rows() {
            return Err(Error::dims("energy term H/K", h.cols(), k.rows()));
        }
        if j.shape() != (h.rows(), k.cols()) {
            return Err(Error::dims(
                "energy term target",
                format!("{}x{}", h.rows(), k.cols()),
                format!("{}x{}", j.nrows(), j.ncols()),
            ));
        }
        Ok(EnergyTerm { h, k, j })
    }

    /// Size `n` of the operator slot.
    pub fn operator_size(&self) -> usize {
        self.k.rows()
    }

    fn residual(&self, q: Quantity<'_>) -> DMatrix<f64> {
        let qk = match (&self.k, q) {
            (Operand::Identity(_), Quantity::Mass(a)) => a.to_dense(),
            (Operand::Identity(_), Quantity::Stiffness(w)) => w.to_dense(),
            (k, Quantity::Mass(a)) => scale_rows(k.to_dense_ref().into_owned(), a.diag()),
            (k, Quantity::Stiffness(w)) => w.mul_dense(&k.to_dense_ref()),
        };
        self.h.mul(qk) - &self.j
    }
}

impl Operand {
    fn to_dense_ref(&self) -> std::borrow::Cow<'_, DMatrix<f64>> {
        match self {
            Operand::Dense(m) => std::borrow::Cow::Borrowed(m),
            other => std::borrow::Cow::Owned(other.to_dense()),
        }
    }
}

#[derive(Clone, Copy)]
enum Quantity<'a> {
    Mass(&'a MassMatrix),
    Stiffness(&'a StiffnessMatrix),
}

/// Data of the general energy: the weight `lambda` and the two optional terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SfoEnergySpec {
    lambda: f64,
    area_term: Option<EnergyTerm>,
    stiffness_term: Option<EnergyTerm>,
}

impl SfoEnergySpec {
    /// The area term is required when `lambda > 0`, the stiffness term when `lambda < 1`.
    pub fn new(
        lambda: f64,
        area_term: Option<EnergyTerm>,
        stiffness_term: Option<EnergyTerm>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!(
                "lambda must lie in [0, 1], got {lambda}"
            )));
        }
        if lambda > 0.0 && area_term.is_none() {
            return Err(Error::InvalidArgument(
                "lambda > 0 needs an area term".into(),
            ));
        }
        if lambda < 1.0 && stiffness_term.is_none() {
            return Err(Error::InvalidArgument(
                "lambda < 1 needs a stiffness term".into(),
            ));
        }
        if let (Some(a), Some(s)) = (&area_term, &stiffness_term) {
            if a.operator_size() != s.operator_size() {
                return Err(Error::dims(
                    "energy terms",
                    a.operator_size(),
                    s.operator_size(),
                ));
            }
        }
        Ok(SfoEnergySpec {
            lambda,
            area_term,
            stiffness_term,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn area_term(&self) -> Option<&EnergyTerm> {
        self.area_term.as_ref()
    }

    pub fn stiffness_term(&self) -> Option<&EnergyTerm> {
        self.stiffness_term.as_ref()
    }

    fn active_area(&self) -> Option<&EnergyTerm> {
        self.area_term.as_ref().filter(|_| self.lambda > 0.0)
    }

    fn active_stiffness(&self) -> Option<&EnergyTerm> {
        self.stiffness_term.as_ref().filter(|_| self.lambda < 1.0)
    }

    fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        let n = mesh.vertex_count();
        for term in self.area_term.iter().chain(&self.stiffness_term) {
            if term.operator_size() != n {
                return Err(Error::dims("energy operator size", n, term.operator_size()));
            }
        }
        Ok(())
    }
}

/// Energy value with the residual matrices it was computed from.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub energy: f64,
    /// `H1 A K1 - J1`, present when the area term is active.
    pub area_residual: Option<DMatrix<f64>>,
    /// `H2 W K2 - J2`, present when the stiffness term is active.
    pub stiffness_residual: Option<DMatrix<f64>>,
    areas: Vec<f64>,
}

/// Evaluates the energy and keeps what the gradient needs.
pub fn evaluate(spec: &SfoEnergySpec, mesh: &Mesh, metric: &DiscreteMetric) -> Result<Evaluation> {
    spec.check_mesh(mesh)?;
    if metric.len() != mesh.edge_count() {
        return Err(Error::dims("metric length", mesh.edge_count(), metric.len()));
    }
    if let Some(face) = first_invalid_face(mesh, metric.lengths(), 0.0) {
        return Err(Error::InvalidMetric { face });
    }
    let areas = face_areas(mesh, metric).map_err(invalid_metric)?;

    let mut energy = 0.0;
    let area_residual = spec.active_area().map(|term| {
        let mass = mass_from_face_areas(mesh, &areas);
        let r = term.residual(Quantity::Mass(&mass));
        energy += spec.lambda * r.norm_squared();
        r
    });
    let stiffness = spec
        .active_stiffness()
        .map(|_| stiffness_from_face_areas(mesh, metric, &areas));
    let stiffness_residual = spec.active_stiffness().map(|term| {
        let r = term.residual(Quantity::Stiffness(stiffness.as_ref().expect("built above")));
        energy += (1.0 - spec.lambda) * r.norm_squared();
        r
    });
    Ok(Evaluation {
        energy,
        area_residual,
        stiffness_residual,
        areas,
    })
}

pub fn sfo_energy(spec: &SfoEnergySpec, mesh: &Mesh, metric: &DiscreteMetric) -> Result<f64> {
    evaluate(spec, mesh, metric).map(|e| e.energy)
}

/// Gradient of the energy at the metric an [`Evaluation`] was computed for.
pub fn gradient_from_evaluation(
    spec: &SfoEnergySpec,
    mesh: &Mesh,
    metric: &DiscreteMetric,
    eval: &Evaluation,
) -> Vec<f64> {
    let mut grad = vec![0.0; mesh.edge_count()];

    if let (Some(term), Some(r)) = (spec.active_area(), &eval.area_residual) {
        let p = term.h.tr_mul(r);
        let outer_diag: Vec<f64> = (0..mesh.vertex_count())
            .map(|i| 2.0 * term.k.row_dot(&p, i, i))
            .collect();
        for (f, (face, fe)) in mesh.faces().iter().zip(mesh.face_edges()).enumerate() {
            let coeff = spec.lambda * face.iter().map(|&v| outer_diag[v]).sum::<f64>() / 3.0;
            let d = area_partials_with_area(metric.face_lengths(mesh, f), eval.areas[f]);
            for (&e, de) in fe.iter().zip(d) {
                grad[e] += coeff * de;
            }
        }
    }

    if let (Some(term), Some(r)) = (spec.active_stiffness(), &eval.stiffness_residual) {
        let p = term.h.tr_mul(r);
        let m = |i: usize, j: usize| 2.0 * term.k.row_dot(&p, i, j);
        let outer_diag: Vec<f64> = (0..mesh.vertex_count()).map(|i| m(i, i)).collect();
        // dE/dw_ij picks up the off-diagonal pair and, through w_ii = -sum w_ij, both diagonals
        let edge_coeff: Vec<f64> = mesh
            .edges()
            .iter()
            .map(|&[i, j]| {
                (1.0 - spec.lambda) * (m(i, j) + m(j, i) - outer_diag[i] - outer_diag[j])
            })
            .collect();
        for (f, fe) in mesh.face_edges().iter().enumerate() {
            let d = half_cotangent_partials(metric.face_lengths(mesh, f), eval.areas[f]);
            for a in 0..3 {
                let c = edge_coeff[fe[a]];
                for b in 0..3 {
                    grad[fe[b]] += c * d[a][b];
                }
            }
        }
    }
    grad
}

/// `dE/dl` in canonical edge order.
pub fn sfo_gradient(spec: &SfoEnergySpec, mesh: &Mesh, metric: &DiscreteMetric) -> Result<Vec<f64>> {
    let eval = evaluate(spec, mesh, metric)?;
    Ok(gradient_from_evaluation(spec, mesh, metric, &eval))
}

/// Energy and gradient from a single evaluation.
pub fn energy_and_gradient(
    spec: &SfoEnergySpec,
    mesh: &Mesh,
    metric: &DiscreteMetric,
) -> Result<(f64, Vec<f64>)> {
    let eval = evaluate(spec, mesh, metric)?;
    let grad = gradient_from_evaluation(spec, mesh, metric, &eval);
    Ok((eval.energy, grad))
}

/// Vertex attribution of the residuals:
/// `eps_i = lambda * sum_j (|e_ij| + |e_ji|) + (1 - lambda) * sum_j (|e'_ij| + |e'_ji|)`.
///
/// Only defined when the residual matrices are square and indexed by mesh vertices.
pub fn per_vertex_energy(spec: &SfoEnergySpec, mesh: &Mesh, metric: &DiscreteMetric) -> Result<Vec<f64>> {
    let eval = evaluate(spec, mesh, metric)?;
    let n = mesh.vertex_count();
    let mut eps = vec![0.0; n];
    let terms = [
        (spec.lambda, &eval.area_residual),
        (1.0 - spec.lambda, &eval.stiffness_residual),
    ];
    for (weight, residual) in terms {
        let Some(r) = residual else { continue };
        if r.shape() != (n, n) {
            return Err(Error::ShapeMismatch {
                rows: r.nrows(),
                cols: r.ncols(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = weight * r[(i, j)].abs();
                eps[i] += v;
                eps[j] += v;
            }
        }
    }
    Ok(eps)
}
