//! Helpers shared by unit tests, integration tests and the acceptance suite: random
//! instances and the central-difference oracle.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Embedding;
use crate::mesh::Mesh;
use crate::metric::{metric_from_embedding, validate_metric, DiscreteMetric, DEFAULT_REL_MARGIN};

/// Embedding with Gaussian noise of standard deviation `sigma` (absolute units).
pub fn jittered(x: &Embedding, sigma: f64, seed: u64) -> Embedding {
    x.perturbed(sigma, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Induced metric of `x` with every length scaled by an independent factor in
/// `1 +- spread`. Resamples with a smaller spread until the strong triangle inequality holds.
pub fn random_valid_metric<R: Rng + ?Sized>(
    mesh: &Mesh,
    x: &Embedding,
    spread: f64,
    rng: &mut R,
) -> DiscreteMetric {
    let base = metric_from_embedding(mesh, x).expect("non-degenerate embedding");
    let mut spread = spread;
    loop {
        let lengths = base
            .lengths()
            .iter()
            .map(|l| l * (1.0 + spread * rng.random_range(-1.0..1.0)))
            .collect();
        let metric = DiscreteMetric::new(mesh, lengths).expect("positive lengths");
        if validate_metric(mesh, &metric, DEFAULT_REL_MARGIN).valid {
            return metric;
        }
        spread *= 0.5;
    }
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * rng.random_range(-1.0..1.0))
}

/// Central differences `(f(x + h_e) - f(x - h_e)) / 2h_e` with `h_e = rel_step * |x_e|`.
pub fn central_difference<F>(f: F, x: &[f64], rel_step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|e| {
            let h = rel_step * x[e].abs().max(f64::MIN_POSITIVE);
            probe[e] = x[e] + h;
            let plus = f(&probe);
            probe[e] = x[e] - h;
            let minus = f(&probe);
            probe[e] = x[e];
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// `max_e |analytic - numeric| / (1 + |numeric|)`.
pub fn max_gradient_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / (1.0 + n.abs()))
        .fold(0.0, f64::max)
}

/// `max_e |analytic - numeric| / max_e |numeric|`; the plain difference when the
/// numeric gradient vanishes.
pub fn normalized_gradient_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = numeric.iter().fold(0.0f64, |m, n| m.max(n.abs()));
    let diff = analytic
        .iter()
        .zip(numeric)
        .fold(0.0f64, |m, (a, n)| m.max((a - n).abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}
