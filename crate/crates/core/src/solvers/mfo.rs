use super::{InitialStep, SolverConfig};
use crate::energy::{energy_and_gradient, sfo_energy, SfoEnergySpec};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::metric::{first_invalid_face, DiscreteMetric};

/// One iteration of the safeguarded descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfoStep {
    /// Energy after the step (unchanged when the step was skipped).
    pub energy: f64,
    /// Step size of the accepted proposal, or the last one tried when skipped.
    pub mu: f64,
    pub halvings: u32,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct MfoOutcome {
    pub metric: DiscreteMetric,
    pub initial_energy: f64,
    pub steps: Vec<MfoStep>,
}

impl MfoOutcome {
    pub fn final_energy(&self) -> f64 {
        self.steps.last().map_or(self.initial_energy, |s| s.energy)
    }
}

/// Gradient descent over edge lengths that only accepts valid, non-worsening metrics.
///
/// Every iteration restarts from the initial step size and halves it while the proposal
/// `l - mu * grad` violates the strong triangle inequality or raises the energy. After
/// `max_halvings` failed halvings the iteration is skipped and the metric kept.
pub fn mfo_descent(
    spec: &SfoEnergySpec,
    mesh: &Mesh,
    initial: &DiscreteMetric,
    config: &SolverConfig,
) -> Result<MfoOutcome> {
    config.validate()?;
    if initial.len() != mesh.edge_count() {
        return Err(Error::dims("metric length", mesh.edge_count(), initial.len()));
    }
    if let Some(face) = first_invalid_face(mesh, initial.lengths(), config.rel_margin) {
        return Err(Error::InvalidInitialMetric { face });
    }
    let mu0 = match config.initial_step {
        InitialStep::RelativeToMeanEdge(r) => r * initial.mean(),
        InitialStep::Absolute(mu) => mu,
    };

    let mut metric = initial.clone();
    let mut energy = sfo_energy(spec, mesh, &metric)?;
    let initial_energy = energy;
    let mut steps = Vec::with_capacity(config.mfo_iterations);
    let mut proposal = vec![0.0; mesh.edge_count()];

    for _ in 0..config.mfo_iterations {
        let (_, grad) = energy_and_gradient(spec, mesh, &metric)?;
        let mut mu = mu0;
        let mut step = None;
        for halvings in 0..=config.max_halvings {
            for ((p, l), g) in proposal.iter_mut().zip(metric.lengths()).zip(&grad) {
                *p = l - mu * g;
            }
            if first_invalid_face(mesh, &proposal, config.rel_margin).is_none() {
                let candidate = DiscreteMetric::from_vec_unchecked(proposal.clone());
                if let Ok(e) = sfo_energy(spec, mesh, &candidate) {
                    if e <= energy {
                        step = Some((candidate, e, halvings));
                        break;
                    }
                }
            }
            if halvings < config.max_halvings {
                mu *= 0.5;
            }
        }
        match step {
            Some((candidate, e, halvings)) => {
                metric = candidate;
                energy = e;
                steps.push(MfoStep {
                    energy,
                    mu,
                    halvings,
                    accepted: true,
                });
            }
            None => steps.push(MfoStep {
                energy,
                mu,
                halvings: config.max_halvings,
                accepted: false,
            }),
        }
    }
    Ok(MfoOutcome {
        metric,
        initial_energy,
        steps,
    })
}
