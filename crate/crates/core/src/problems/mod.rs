//! Benchmark objectives: sampler, mini-batch loss and gradient, and a test
//! error for each problem.

mod gauss;
mod heat;
mod polyreg;
mod quadratic;

pub use gauss::GaussianDensityProblem;
pub use heat::{exact_heat_solution, heat_dkm_sample, HeatDkmProblem};
pub use polyreg::{polyreg_model, polyreg_sample, PolyRegProblem};
pub use quadratic::{quadratic_grad, QuadraticProblem};

use crate::error::{first_non_finite, Error, Result};
use crate::nn::Batch;
use crate::params::ParamVector;
use crate::prng::RngStream;

/// A stochastic optimization problem `min_theta E[L(theta, X)]`.
///
/// Batch losses are means of per-sample losses and `loss_and_grad` returns the
/// exact gradient of that mean. Samplers draw all inputs of a batch first and
/// any noise afterwards.
pub trait StochasticObjective: Send + Sync {
    fn name(&self) -> &'static str;

    fn param_dim(&self) -> usize;

    fn init_params(&self, stream: &mut RngStream) -> ParamVector;

    fn sample_batch(&self, stream: &mut RngStream, batch_size: usize) -> Batch;

    fn loss(&self, params: &[f64], batch: &Batch) -> Result<f64>;

    fn loss_and_grad(&self, params: &[f64], batch: &Batch) -> Result<(f64, ParamVector)>;

    fn grad(&self, params: &[f64], batch: &Batch) -> Result<ParamVector> {
        self.loss_and_grad(params, batch).map(|(_, g)| g)
    }

    /// Error of `params` against the known solution, estimated with `samples`
    /// Monte Carlo points drawn from `stream` where needed.
    fn test_error(&self, params: &[f64], stream: &mut RngStream, samples: usize) -> Result<f64>;
}

const CHUNK: usize = 4096;

/// Monte Carlo relative L2 error
/// `sqrt( sum_j (model(x_j) - exact(x_j))^2 / sum_j exact(x_j)^2 )`.
///
/// `model` receives a row-major matrix of `dim`-wide points and returns one
/// value per row; `sample_point` fills one point. Points are processed in
/// chunks so memory stays bounded for large `samples`.
pub fn relative_l2_error<M, E, S>(
    model: M,
    exact: E,
    mut sample_point: S,
    dim: usize,
    samples: usize,
    stream: &mut RngStream,
) -> Result<f64>
where
    M: Fn(&[f64]) -> Result<Vec<f64>>,
    E: Fn(&[f64]) -> f64,
    S: FnMut(&mut RngStream, &mut [f64]),
{
    if samples == 0 || dim == 0 {
        return Err(Error::Usage(
            "Monte Carlo error needs at least one sample".into(),
        ));
    }
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    let mut remaining = samples;
    let mut points = Vec::with_capacity(CHUNK.min(samples) * dim);
    while remaining > 0 {
        let rows = remaining.min(CHUNK);
        points.clear();
        points.resize(rows * dim, 0.0);
        for point in points.chunks_exact_mut(dim) {
            sample_point(stream, point);
        }
        let values = model(&points)?;
        if values.len() != rows {
            return Err(Error::shape("model evaluations", rows, values.len()));
        }
        if let Some(index) = first_non_finite(&values) {
            return Err(Error::NonFinite {
                context: "model evaluation",
                index,
            });
        }
        for (point, value) in points.chunks_exact(dim).zip(&values) {
            let reference = exact(point);
            numerator += (value - reference) * (value - reference);
            denominator += reference * reference;
        }
        remaining -= rows;
    }
    if denominator == 0.0 {
        return Err(Error::DegenerateReference);
    }
    Ok((numerator / denominator).sqrt())
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::prng::derive_stream;

    fn unit_interval(s: &mut RngStream, x: &mut [f64]) {
        x[0] = s.uniform_unchecked(-1.0, 1.0);
    }

    #[test]
    fn perfect_and_doubled_models() {
        let exact = |x: &[f64]| 1.0 + x[0] * x[0];
        let perfect = |pts: &[f64]| Ok(pts.iter().map(|x| 1.0 + x * x).collect());
        let doubled = |pts: &[f64]| Ok(pts.iter().map(|x| 2.0 * (1.0 + x * x)).collect());
        let e0 = relative_l2_error(
            perfect,
            exact,
            unit_interval,
            1,
            5000,
            &mut derive_stream(1, 0),
        )
        .unwrap();
        let e1 = relative_l2_error(
            doubled,
            exact,
            unit_interval,
            1,
            5000,
            &mut derive_stream(1, 0),
        )
        .unwrap();
        assert_eq!(e0, 0.0);
        assert_eq!(e1, 1.0);
    }

    #[test]
    fn zero_reference_is_degenerate() {
        let r = relative_l2_error(
            |pts: &[f64]| Ok(vec![1.0; pts.len()]),
            |_: &[f64]| 0.0,
            unit_interval,
            1,
            10,
            &mut derive_stream(2, 0),
        );
        assert!(matches!(r, Err(Error::DegenerateReference)));
    }
}
