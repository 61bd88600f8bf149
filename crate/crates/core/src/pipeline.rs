//! End-to-end synthesis: build operators from input shapes, assemble the energy and run the
//! alternating solver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nalgebra::DMatrix;

use crate::energy::{
    make_shape_from_difference_spec, make_shape_from_laplacian_spec, per_vertex_energy, SfoEnergySpec,
};
use crate::error::{Error, Result};
use crate::geometry::Embedding;
use crate::mesh::Mesh;
use crate::metric::metric_from_embedding;
use crate::operators::{
    area_difference, conformal_difference, mass_matrix, stiffness_matrix, FunctionalMap, ShapeDifference,
    DEFAULT_PINV_REL_TOL,
};
use crate::solvers::{alternate_with, smacof_matrices, AlternateOutcome, SmacofMatrices, SolverConfig};

/// A mesh together with its embedding.
#[derive(Debug, Clone, Copy)]
pub struct Shape<'a> {
    pub mesh: &'a Mesh,
    pub embedding: &'a Embedding,
}

impl<'a> Shape<'a> {
    pub fn new(mesh: &'a Mesh, embedding: &'a Embedding) -> Result<Self> {
        if embedding.len() != mesh.vertex_count() {
            return Err(Error::dims("embedding rows", mesh.vertex_count(), embedding.len()));
        }
        Ok(Shape { mesh, embedding })
    }
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub outcome: AlternateOutcome,
    /// Per-vertex share of the final energy; `None` when the residuals are not square.
    pub vertex_energy: Option<Vec<f64>>,
}

/// Gaussian noise with standard deviation `sigma` times the bounding-box diagonal.
pub fn perturb(x: &Embedding, sigma: f64, seed: u64) -> Result<Embedding> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("perturbation must be non-negative, got {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(x.perturbed(sigma * x.bbox_diagonal(), &mut rng))
}

fn solve(
    spec: &SfoEnergySpec,
    mesh: &Mesh,
    start: &Embedding,
    config: &SolverConfig,
    matrices: &SmacofMatrices,
) -> Result<Synthesis> {
    let outcome = alternate_with(spec, mesh, start, config, matrices)?;
    let metric = metric_from_embedding(mesh, &outcome.embedding)?;
    let vertex_energy = match per_vertex_energy(spec, mesh, &metric) {
        Ok(e) => Some(e),
        Err(Error::ShapeMismatch { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(Synthesis { outcome, vertex_energy })
}

/// Deforms `start` until its stiffness matrix, seen through `f`, matches `target_stiffness`.
pub fn shape_from_laplacian(
    mesh: &Mesh,
    start: &Embedding,
    target_stiffness: &DMatrix<f64>,
    f: &FunctionalMap,
    config: &SolverConfig,
) -> Result<Synthesis> {
    if f.target_size() != mesh.vertex_count() {
        return Err(Error::dims("functional map rows", mesh.vertex_count(), f.target_size()));
    }
    let spec = make_shape_from_laplacian_spec(f, target_stiffness)?;
    solve(&spec, mesh, start, config, &smacof_matrices(mesh)?)
}

/// Area-based and conformal differences from `a` to `b`; `f` maps functions on `a` to `b`.
pub fn shape_differences(a: Shape<'_>, b: Shape<'_>, f: &FunctionalMap) -> Result<(ShapeDifference, ShapeDifference)> {
    let la = metric_from_embedding(a.mesh, a.embedding)?;
    let lb = metric_from_embedding(b.mesh, b.embedding)?;
    let v = area_difference(&mass_matrix(a.mesh, &la)?, &mass_matrix(b.mesh, &lb)?, f)?;
    let r = conformal_difference(
        &stiffness_matrix(a.mesh, &la)?,
        &stiffness_matrix(b.mesh, &lb)?,
        f,
        DEFAULT_PINV_REL_TOL,
    )?;
    Ok((v, r))
}

fn difference_spec(
    c: Shape<'_>,
    g: &FunctionalMap,
    v: &ShapeDifference,
    r: &ShapeDifference,
    lambda: f64,
) -> Result<SfoEnergySpec> {
    let lc = metric_from_embedding(c.mesh, c.embedding)?;
    make_shape_from_difference_spec(
        &mass_matrix(c.mesh, &lc)?,
        &stiffness_matrix(c.mesh, &lc)?,
        g,
        v,
        r,
        lambda,
        DEFAULT_PINV_REL_TOL,
    )
}

/// Finds `X` on the mesh of `c` whose differences from `c` reproduce those from `a` to `b`.
///
/// `f` maps functions on `a` to `b` and `g` maps functions on `a` to `c`. The solve starts
/// from `start`, normally the embedding of `c`.
#[allow(clippy::too_many_arguments)]
pub fn analogy(
    a: Shape<'_>,
    b: Shape<'_>,
    c: Shape<'_>,
    f: &FunctionalMap,
    g: &FunctionalMap,
    lambda: f64,
    start: &Embedding,
    config: &SolverConfig,
) -> Result<Synthesis> {
    let (v, r) = shape_differences(a, b, f)?;
    let spec = difference_spec(c, g, &v, &r, lambda)?;
    solve(&spec, c.mesh, start, config, &smacof_matrices(c.mesh)?)
}

/// Repeats the analogy with `c` set to the latest result, starting from `b`.
///
/// The differences from `a` to `b` are computed once and `f` doubles as the map to every
/// intermediate shape, which shares the mesh of `b`.
pub fn exaggerate(
    a: Shape<'_>,
    b: Shape<'_>,
    f: &FunctionalMap,
    rounds: usize,
    lambda: f64,
    config: &SolverConfig,
) -> Result<Vec<Synthesis>> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("exaggeration needs at least one round".into()));
    }
    let (v, r) = shape_differences(a, b, f)?;
    let matrices = smacof_matrices(b.mesh)?;
    let mut current = b.embedding.clone();
    let mut results = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let spec = difference_spec(Shape::new(b.mesh, &current)?, f, &v, &r, lambda)?;
        let step = solve(&spec, b.mesh, &current, config, &matrices)?;
        current = step.outcome.embedding.clone();
        results.push(step);
    }
    Ok(results)
}
