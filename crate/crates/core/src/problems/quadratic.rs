use serde::{Deserialize, Serialize};

use super::StochasticObjective;
use crate::error::{Error, Result};
use crate::nn::Batch;
use crate::params::ParamVector;
use crate::prng::RngStream;

/// Minimize `E |theta - X|^2` for `X ~ N(mean, I_d)`. The minimizer is `mean`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticProblem {
    pub mean: Vec<f64>,
}

impl QuadraticProblem {
    pub fn new(dim: usize) -> Self {
        QuadraticProblem {
            mean: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn check(&self, params: &[f64], batch: &Batch) -> Result<()> {
        if params.len() != self.dim() {
            return Err(Error::shape(
                "quadratic parameters",
                self.dim(),
                params.len(),
            ));
        }
        if batch.input_dim() != self.dim() {
            return Err(Error::shape(
                "quadratic batch",
                self.dim(),
                batch.input_dim(),
            ));
        }
        Ok(())
    }
}

/// `2 (theta - mean of the batch samples)`
pub fn quadratic_grad(params: &[f64], batch: &Batch) -> ParamVector {
    let rows = batch.rows() as f64;
    let mut grad = ParamVector::zeros(params.len());
    for j in 0..batch.rows() {
        for (g, x) in grad.iter_mut().zip(batch.input_row(j)) {
            *g += x;
        }
    }
    for (g, p) in grad.iter_mut().zip(params) {
        *g = 2.0 * (p - *g / rows);
    }
    grad
}

impl StochasticObjective for QuadraticProblem {
    fn name(&self) -> &'static str {
        "quadratic"
    }

    fn param_dim(&self) -> usize {
        self.dim()
    }

    /// Standard normal start.
    fn init_params(&self, stream: &mut RngStream) -> ParamVector {
        let mut p = ParamVector::zeros(self.dim());
        stream.fill_standard_normal(&mut p);
        p
    }

    fn sample_batch(&self, stream: &mut RngStream, batch_size: usize) -> Batch {
        let d = self.dim();
        let mut inputs = vec![0.0; batch_size * d];
        stream.fill_standard_normal(&mut inputs);
        for row in inputs.chunks_exact_mut(d) {
            for (x, m) in row.iter_mut().zip(&self.mean) {
                *x += m;
            }
        }
        Batch::new(inputs, d, Vec::new(), 0).expect("quadratic batch shape")
    }

    fn loss(&self, params: &[f64], batch: &Batch) -> Result<f64> {
        self.check(params, batch)?;
        let total: f64 = (0..batch.rows())
            .map(|j| {
                params
                    .iter()
                    .zip(batch.input_row(j))
                    .map(|(p, x)| (p - x) * (p - x))
                    .sum::<f64>()
            })
            .sum();
        Ok(total / batch.rows() as f64)
    }

    fn loss_and_grad(&self, params: &[f64], batch: &Batch) -> Result<(f64, ParamVector)> {
        let loss = self.loss(params, batch)?;
        Ok((loss, quadratic_grad(params, batch)))
    }

    /// `(1/d) |theta - mean|^2`, exact.
    fn test_error(&self, params: &[f64], _stream: &mut RngStream, _samples: usize) -> Result<f64> {
        if params.len() != self.dim() {
            return Err(Error::shape(
                "quadratic parameters",
                self.dim(),
                params.len(),
            ));
        }
        let sq: f64 = params
            .iter()
            .zip(&self.mean)
            .map(|(p, m)| (p - m) * (p - m))
            .sum();
        Ok(sq / self.dim() as f64)
    }
}
