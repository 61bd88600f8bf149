//! Embedding-from-metric (SMACOF), safeguarded metric-from-operator descent, and the
//! alternating scheme that interleaves them.

mod mfo;
mod smacof;

pub use mfo::{mfo_descent, MfoOutcome, MfoStep};
pub use smacof::{smacof, smacof_matrices, smacof_step, stress, SmacofMatrices};

use std::fmt;

use crate::energy::{sfo_energy, SfoEnergySpec};
use crate::error::{Error, Result};
use crate::geometry::Embedding;
use crate::mesh::Mesh;
use crate::metric::{metric_from_embedding, DEFAULT_REL_MARGIN};

/// Initial step size of every descent iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialStep {
    /// Fraction of the mean edge length of the metric the phase starts from.
    RelativeToMeanEdge(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub outer_iterations: usize,
    pub mfo_iterations: usize,
    pub mds_iterations: usize,
    pub initial_step: InitialStep,
    pub max_halvings: u32,
    pub rel_margin: f64,
    /// Stop when an outer iteration improves the energy by less than this fraction.
    /// Zero runs all outer iterations.
    pub energy_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            outer_iterations: 20,
            mfo_iterations: 5,
            mds_iterations: 10,
            initial_step: InitialStep::RelativeToMeanEdge(1e-2),
            max_halvings: 40,
            rel_margin: DEFAULT_REL_MARGIN,
            energy_tolerance: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("solver config: {what}")));
        if self.outer_iterations == 0 || self.mfo_iterations == 0 || self.mds_iterations == 0 {
            return bad("iteration counts must be at least 1");
        }
        let step = match self.initial_step {
            InitialStep::RelativeToMeanEdge(s) | InitialStep::Absolute(s) => s,
        };
        if !(step > 0.0 && step.is_finite()) {
            return bad("initial step must be positive");
        }
        if !(self.rel_margin >= 0.0) {
            return bad("triangle-inequality margin must be non-negative");
        }
        if !(self.energy_tolerance >= 0.0) {
            return bad("energy tolerance must be non-negative");
        }
        Ok(())
    }
}

impl fmt::Display for SolverConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let step = match self.initial_step {
            InitialStep::RelativeToMeanEdge(s) => format!("{s:e} x mean edge"),
            InitialStep::Absolute(s) => format!("{s:e}"),
        };
        write!(
            f,
            "outer_iterations={} mfo_iterations={} mds_iterations={} initial_step={} max_halvings={} rel_margin={:e} energy_tolerance={:e}",
            self.outer_iterations,
            self.mfo_iterations,
            self.mds_iterations,
            step,
            self.max_halvings,
            self.rel_margin,
            self.energy_tolerance
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Mfo,
    Mds,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Mfo => "MfO",
            Phase::Mds => "MDS",
        })
    }
}

/// One inner iteration of either phase. Fields that do not apply to the phase are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub outer_iter: usize,
    pub phase: Phase,
    pub inner_iter: usize,
    pub energy: Option<f64>,
    pub stress: Option<f64>,
    pub mu: Option<f64>,
    pub halvings: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
}

impl SolverTrace {
    pub const CSV_HEADER: &'static str = "outer_iter,phase,inner_iter,energy,stress,mu,halvings";

    /// CSV with one row per record; inapplicable fields are left empty.
    pub fn to_csv(&self) -> String {
        fn num(v: Option<f64>) -> String {
            v.map(|x| format!("{x:.16e}")).unwrap_or_default()
        }
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.outer_iter,
                r.phase,
                r.inner_iter,
                num(r.energy),
                num(r.stress),
                num(r.mu),
                r.halvings.map(|h| h.to_string()).unwrap_or_default()
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct AlternateOutcome {
    pub embedding: Embedding,
    pub trace: SolverTrace,
    /// Energy of the metric induced by the starting embedding.
    pub initial_energy: f64,
    /// Energy of the metric induced by the returned embedding.
    pub final_energy: f64,
    pub outer_iterations: usize,
}

/// Alternates metric descent and SMACOF starting from the embedding `start`.
pub fn alternate(
    spec: &SfoEnergySpec,
    mesh: &Mesh,
    start: &Embedding,
    config: &SolverConfig,
) -> Result<AlternateOutcome> {
    let matrices = smacof_matrices(mesh)?;
    alternate_with(spec, mesh, start, config, &matrices)
}

/// [`alternate`] with precomputed SMACOF matrices for the mesh.
pub fn alternate_with(
    spec: &SfoEnergySpec,
    mesh: &Mesh,
    start: &Embedding,
    config: &SolverConfig,
    matrices: &SmacofMatrices,
) -> Result<AlternateOutcome> {
    config.validate()?;
    start.check_rows(mesh)?;
    let mut x = start.clone();
    let initial_energy = sfo_energy(spec, mesh, &metric_from_embedding(mesh, &x)?)?;
    let mut energy = initial_energy;
    let mut trace = SolverTrace::default();
    let mut outer_iterations = 0;

    for outer in 1..=config.outer_iterations {
        outer_iterations = outer;
        let metric = metric_from_embedding(mesh, &x)?;
        let mfo = mfo_descent(spec, mesh, &metric, config)?;
        for (k, s) in mfo.steps.iter().enumerate() {
            trace.records.push(TraceRecord {
                outer_iter: outer,
                phase: Phase::Mfo,
                inner_iter: k + 1,
                energy: Some(s.energy),
                stress: None,
                mu: Some(s.mu),
                halvings: Some(s.halvings),
            });
        }

        let (next, stresses) = smacof(mesh, &mfo.metric, &x, config.mds_iterations, matrices)?;
        for (k, s) in stresses.into_iter().enumerate() {
            trace.records.push(TraceRecord {
                outer_iter: outer,
                phase: Phase::Mds,
                inner_iter: k + 1,
                energy: None,
                stress: Some(s),
                mu: None,
                halvings: None,
            });
        }
        x = next;

        let previous = energy;
        energy = sfo_energy(spec, mesh, &metric_from_embedding(mesh, &x)?)?;
        if config.energy_tolerance > 0.0
            && previous - energy < config.energy_tolerance * previous
        {
            break;
        }
    }

    Ok(AlternateOutcome {
        embedding: x,
        trace,
        initial_energy,
        final_energy: energy,
        outer_iterations,
    })
}
