//! Python bindings. Points are lists of `[x, y, z]`, metrics are lists of edge lengths in
//! the mesh's canonical edge order, and matrices are lists of rows.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sfo_core::energy::{self, SfoEnergySpec};
use sfo_core::operators::{self, FunctionalMap};
use sfo_core::pipeline::{self, Shape};
use sfo_core::solvers::{self, AlternateOutcome, InitialStep};
use sfo_core::{io, metric, primitives, DiscreteMetric, Embedding, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for sfo_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn to_matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn embedding(points: &[[f64; 3]]) -> PyResult<Embedding> {
    Embedding::from_rows(points).py()
}

fn lengths(mesh: &PyMesh, l: Vec<f64>) -> PyResult<DiscreteMetric> {
    DiscreteMetric::new(&mesh.0, l).py()
}

fn map_or_identity(map: Option<Vec<Vec<f64>>>, n: usize) -> PyResult<FunctionalMap> {
    match map {
        Some(m) => FunctionalMap::new(to_matrix(&m)?).py(),
        None => Ok(FunctionalMap::identity(n)),
    }
}

/// Closed triangle mesh.
#[pyclass(name = "Mesh", frozen, module = "sfo")]
pub struct PyMesh(sfo_core::Mesh);

#[pymethods]
impl PyMesh {
    #[new]
    fn new(vertex_count: usize, faces: Vec<[usize; 3]>) -> PyResult<Self> {
        sfo_core::Mesh::new(vertex_count, faces).py().map(PyMesh)
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.0.vertex_count()
    }

    #[getter]
    fn face_count(&self) -> usize {
        self.0.face_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    fn faces(&self) -> Vec<[usize; 3]> {
        self.0.faces().to_vec()
    }

    /// Canonical edges `(i, j)` with `i < j`; metric entries follow this order.
    fn edges(&self) -> Vec<[usize; 2]> {
        self.0.edges().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(vertices={}, edges={}, faces={})",
            self.0.vertex_count(),
            self.0.edge_count(),
            self.0.face_count()
        )
    }
}

#[pyclass(name = "SolverConfig", module = "sfo", from_py_object)]
#[derive(Clone)]
pub struct PySolverConfig {
    #[pyo3(get, set)]
    outer_iterations: usize,
    #[pyo3(get, set)]
    mfo_iterations: usize,
    #[pyo3(get, set)]
    mds_iterations: usize,
    /// Initial step as a fraction of the mean edge length.
    #[pyo3(get, set)]
    initial_step: f64,
    #[pyo3(get, set)]
    max_halvings: u32,
    #[pyo3(get, set)]
    rel_margin: f64,
    #[pyo3(get, set)]
    energy_tolerance: f64,
}

impl PySolverConfig {
    fn inner(&self) -> solvers::SolverConfig {
        solvers::SolverConfig {
            outer_iterations: self.outer_iterations,
            mfo_iterations: self.mfo_iterations,
            mds_iterations: self.mds_iterations,
            initial_step: InitialStep::RelativeToMeanEdge(self.initial_step),
            max_halvings: self.max_halvings,
            rel_margin: self.rel_margin,
            energy_tolerance: self.energy_tolerance,
        }
    }
}

#[pymethods]
impl PySolverConfig {
    #[new]
    #[pyo3(signature = (
        outer_iterations=20, mfo_iterations=5, mds_iterations=10, initial_step=1e-2,
        max_halvings=40, rel_margin=1e-7, energy_tolerance=1e-8
    ))]
    fn new(
        outer_iterations: usize,
        mfo_iterations: usize,
        mds_iterations: usize,
        initial_step: f64,
        max_halvings: u32,
        rel_margin: f64,
        energy_tolerance: f64,
    ) -> PyResult<Self> {
        let c = PySolverConfig {
            outer_iterations,
            mfo_iterations,
            mds_iterations,
            initial_step,
            max_halvings,
            rel_margin,
            energy_tolerance,
        };
        c.inner().validate().py()?;
        Ok(c)
    }

    fn __repr__(&self) -> String {
        format!("SolverConfig({})", self.inner())
    }
}

fn config_of(config: Option<PySolverConfig>) -> solvers::SolverConfig {
    config.map_or_else(solvers::SolverConfig::default, |c| c.inner())
}

/// Energy `lambda |H1 A K1 - J1|^2 + (1 - lambda) |H2 W K2 - J2|^2` built by one of the
/// static constructors.
#[pyclass(name = "EnergySpec", frozen, module = "sfo")]
pub struct PyEnergySpec(SfoEnergySpec);

#[pymethods]
impl PyEnergySpec {
    /// `|W(l) F - W_B F|^2`; `map` defaults to the identity.
    #[staticmethod]
    #[pyo3(signature = (target_stiffness, map=None))]
    fn from_laplacian(target_stiffness: Vec<Vec<f64>>, map: Option<Vec<Vec<f64>>>) -> PyResult<Self> {
        let w = to_matrix(&target_stiffness)?;
        let f = map_or_identity(map, w.nrows())?;
        energy::make_shape_from_laplacian_spec(&f, &w).py().map(PyEnergySpec)
    }

    /// Analogy energy on shape C (given as mesh and points) reproducing the differences
    /// from A to B. `f` maps A to B, `g` maps A to C; both default to the identity.
    #[staticmethod]
    #[pyo3(signature = (a, b, c, lam=0.5, f=None, g=None))]
    fn from_difference(
        a: (PyRef<'_, PyMesh>, Vec<[f64; 3]>),
        b: (PyRef<'_, PyMesh>, Vec<[f64; 3]>),
        c: (PyRef<'_, PyMesh>, Vec<[f64; 3]>),
        lam: f64,
        f: Option<Vec<Vec<f64>>>,
        g: Option<Vec<Vec<f64>>>,
    ) -> PyResult<Self> {
        let (xa, xb, xc) = (embedding(&a.1)?, embedding(&b.1)?, embedding(&c.1)?);
        let sa = Shape::new(&a.0 .0, &xa).py()?;
        let sb = Shape::new(&b.0 .0, &xb).py()?;
        let f = map_or_identity(f, sb.mesh.vertex_count())?;
        let g = map_or_identity(g, c.0 .0.vertex_count())?;
        let (v, r) = pipeline::shape_differences(sa, sb, &f).py()?;
        let lc = metric::metric_from_embedding(&c.0 .0, &xc).py()?;
        let spec = energy::make_shape_from_difference_spec(
            &operators::mass_matrix(&c.0 .0, &lc).py()?,
            &operators::stiffness_matrix(&c.0 .0, &lc).py()?,
            &g,
            &v,
            &r,
            lam,
            operators::DEFAULT_PINV_REL_TOL,
        )
        .py()?;
        Ok(PyEnergySpec(spec))
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda()
    }

    fn energy(&self, mesh: &PyMesh, lengths_: Vec<f64>) -> PyResult<f64> {
        energy::sfo_energy(&self.0, &mesh.0, &lengths(mesh, lengths_)?).py()
    }

    fn gradient(&self, mesh: &PyMesh, lengths_: Vec<f64>) -> PyResult<Vec<f64>> {
        energy::sfo_gradient(&self.0, &mesh.0, &lengths(mesh, lengths_)?).py()
    }

    fn per_vertex_energy(&self, mesh: &PyMesh, lengths_: Vec<f64>) -> PyResult<Vec<f64>> {
        energy::per_vertex_energy(&self.0, &mesh.0, &lengths(mesh, lengths_)?).py()
    }
}

type MeshAndPoints = (PyMesh, Vec<[f64; 3]>);

fn pair((mesh, x): (sfo_core::Mesh, Embedding)) -> MeshAndPoints {
    (PyMesh(mesh), x.to_rows())
}

#[pyfunction]
fn regular_tetrahedron() -> MeshAndPoints {
    pair(primitives::regular_tetrahedron())
}

#[pyfunction]
fn icosphere(level: u32) -> MeshAndPoints {
    pair(primitives::icosphere(level))
}

#[pyfunction]
fn torus(major: usize, minor: usize, major_radius: f64, minor_radius: f64) -> MeshAndPoints {
    pair(primitives::torus(major, minor, major_radius, minor_radius))
}

/// Reads an OFF (or, by extension, OBJ) file.
#[pyfunction]
fn read_mesh(path: &str) -> PyResult<MeshAndPoints> {
    io::read_mesh(path).py().map(pair)
}

#[pyfunction]
fn write_off(path: &str, mesh: &PyMesh, points: Vec<[f64; 3]>) -> PyResult<()> {
    io::write_off(path, &mesh.0, &embedding(&points)?).py()
}

#[pyfunction]
fn metric_from_embedding(mesh: &PyMesh, points: Vec<[f64; 3]>) -> PyResult<Vec<f64>> {
    Ok(metric::metric_from_embedding(&mesh.0, &embedding(&points)?).py()?.into_lengths())
}

/// Returns `(valid, [(face, slack), ...])`.
#[pyfunction]
#[pyo3(signature = (mesh, lengths_, rel_margin=1e-7))]
fn validate_metric(mesh: &PyMesh, lengths_: Vec<f64>, rel_margin: f64) -> PyResult<(bool, Vec<(usize, f64)>)> {
    let v = metric::validate_metric(&mesh.0, &lengths(mesh, lengths_)?, rel_margin);
    Ok((v.valid, v.violations))
}

/// Diagonal of the lumped mass matrix.
#[pyfunction]
fn mass_matrix(mesh: &PyMesh, lengths_: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(operators::mass_matrix(&mesh.0, &lengths(mesh, lengths_)?).py()?.diag().to_vec())
}

#[pyfunction]
fn stiffness_matrix(mesh: &PyMesh, lengths_: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let w = operators::stiffness_matrix(&mesh.0, &lengths(mesh, lengths_)?).py()?;
    Ok(from_matrix(&w.to_dense()))
}

/// `(eigenvalues, eigenvectors as rows per vertex)` for the `k` smallest eigenvalues.
#[pyfunction]
fn lb_eigenbasis(mesh: &PyMesh, lengths_: Vec<f64>, k: usize) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let b = operators::lb_eigenbasis(&mesh.0, &lengths(mesh, lengths_)?, k).py()?;
    Ok((b.values, from_matrix(&b.vectors)))
}

#[pyfunction]
fn stress(mesh: &PyMesh, lengths_: Vec<f64>, points: Vec<[f64; 3]>) -> PyResult<f64> {
    Ok(solvers::stress(&mesh.0, &lengths(mesh, lengths_)?, &embedding(&points)?))
}

/// Returns `(points, stress after each iteration)`.
#[pyfunction]
fn smacof(mesh: &PyMesh, lengths_: Vec<f64>, points: Vec<[f64; 3]>, iterations: usize) -> PyResult<(Vec<[f64; 3]>, Vec<f64>)> {
    let m = solvers::smacof_matrices(&mesh.0).py()?;
    let (x, s) = solvers::smacof(&mesh.0, &lengths(mesh, lengths_)?, &embedding(&points)?, iterations, &m).py()?;
    Ok((x.to_rows(), s))
}

/// Returns `(lengths, energy after each step)`.
#[pyfunction]
#[pyo3(signature = (spec, mesh, lengths_, config=None))]
fn mfo_descent(
    spec: &PyEnergySpec,
    mesh: &PyMesh,
    lengths_: Vec<f64>,
    config: Option<PySolverConfig>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let out = solvers::mfo_descent(&spec.0, &mesh.0, &lengths(mesh, lengths_)?, &config_of(config)).py()?;
    let energies = out.steps.iter().map(|s| s.energy).collect();
    Ok((out.metric.into_lengths(), energies))
}

fn outcome_dict<'py>(py: Python<'py>, o: &AlternateOutcome, vertex_energy: Option<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("points", o.embedding.to_rows())?;
    d.set_item("initial_energy", o.initial_energy)?;
    d.set_item("final_energy", o.final_energy)?;
    d.set_item("outer_iterations", o.outer_iterations)?;
    d.set_item("trace_csv", o.trace.to_csv())?;
    d.set_item("vertex_energy", vertex_energy)?;
    Ok(d)
}

/// Alternates metric descent and SMACOF from `points`.
#[pyfunction]
#[pyo3(signature = (spec, mesh, points, config=None))]
fn alternate<'py>(
    py: Python<'py>,
    spec: &PyEnergySpec,
    mesh: &PyMesh,
    points: Vec<[f64; 3]>,
    config: Option<PySolverConfig>,
) -> PyResult<Bound<'py, PyDict>> {
    let out = solvers::alternate(&spec.0, &mesh.0, &embedding(&points)?, &config_of(config)).py()?;
    outcome_dict(py, &out, None)
}

#[pyfunction]
#[pyo3(signature = (mesh, points, target_stiffness, map=None, config=None))]
fn shape_from_laplacian<'py>(
    py: Python<'py>,
    mesh: &PyMesh,
    points: Vec<[f64; 3]>,
    target_stiffness: Vec<Vec<f64>>,
    map: Option<Vec<Vec<f64>>>,
    config: Option<PySolverConfig>,
) -> PyResult<Bound<'py, PyDict>> {
    let f = map_or_identity(map, mesh.0.vertex_count())?;
    let s = pipeline::shape_from_laplacian(
        &mesh.0,
        &embedding(&points)?,
        &to_matrix(&target_stiffness)?,
        &f,
        &config_of(config),
    )
    .py()?;
    outcome_dict(py, &s.outcome, s.vertex_energy)
}

/// Gaussian noise of `sigma` times the bounding-box diagonal, seeded.
#[pyfunction]
fn perturb(points: Vec<[f64; 3]>, sigma: f64, seed: u64) -> PyResult<Vec<[f64; 3]>> {
    Ok(pipeline::perturb(&embedding(&points)?, sigma, seed).py()?.to_rows())
}

#[pymodule]
fn sfo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PyEnergySpec>()?;
    m.add_function(wrap_pyfunction!(regular_tetrahedron, m)?)?;
    m.add_function(wrap_pyfunction!(icosphere, m)?)?;
    m.add_function(wrap_pyfunction!(torus, m)?)?;
    m.add_function(wrap_pyfunction!(read_mesh, m)?)?;
    m.add_function(wrap_pyfunction!(write_off, m)?)?;
    m.add_function(wrap_pyfunction!(metric_from_embedding, m)?)?;
    m.add_function(wrap_pyfunction!(validate_metric, m)?)?;
    m.add_function(wrap_pyfunction!(mass_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(stiffness_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(lb_eigenbasis, m)?)?;
    m.add_function(wrap_pyfunction!(stress, m)?)?;
    m.add_function(wrap_pyfunction!(smacof, m)?)?;
    m.add_function(wrap_pyfunction!(mfo_descent, m)?)?;
    m.add_function(wrap_pyfunction!(alternate, m)?)?;
    m.add_function(wrap_pyfunction!(shape_from_laplacian, m)?)?;
    m.add_function(wrap_pyfunction!(perturb, m)?)?;
    m.add("DEFAULT_LAMBDA", energy::DEFAULT_LAMBDA)?;
    Ok(())
}
