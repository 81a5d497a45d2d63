use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{relative_l2_error, StochasticObjective};
use crate::error::{Error, Result};
use crate::nn::Batch;
use crate::params::ParamVector;
use crate::prng::RngStream;

/// Least-squares fit of `sin(pi x)` on `[-1, 1]` by a monomial-basis
/// polynomial, trained on noisy samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyRegProblem {
    pub degree: usize,
    /// Variance of the additive Gaussian target noise.
    pub noise_var: f64,
}

impl Default for PolyRegProblem {
    fn default() -> Self {
        PolyRegProblem {
            degree: 25,
            noise_var: 0.2,
        }
    }
}

/// `sum_k theta_k x^k` by Horner's rule.
pub fn polyreg_model(theta: &[f64], x: f64) -> f64 {
    theta.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// `J` inputs `x ~ U(-1, 1)` first, then `J` noise draws:
/// `y = sin(pi x) + sqrt(noise_var) z`.
pub fn polyreg_sample(stream: &mut RngStream, batch_size: usize, noise_var: f64) -> Batch {
    let mut inputs = vec![0.0; batch_size];
    stream.fill_uniform(&mut inputs, -1.0, 1.0);
    let scale = noise_var.sqrt();
    let targets = inputs
        .iter()
        .map(|&x| libm::sin(PI * x) + scale * stream.standard_normal())
        .collect();
    Batch::new(inputs, 1, targets, 1).expect("polyreg batch shape")
}

impl PolyRegProblem {
    fn check(&self, params: &[f64], batch: &Batch) -> Result<()> {
        if params.len() != self.degree + 1 {
            return Err(Error::shape(
                "polynomial coefficients",
                self.degree + 1,
                params.len(),
            ));
        }
        if batch.input_dim() != 1 || batch.target_dim() != 1 {
            return Err(Error::shape("polyreg batch width", 1, batch.input_dim()));
        }
        Ok(())
    }
}

impl StochasticObjective for PolyRegProblem {
    fn name(&self) -> &'static str {
        "polyreg"
    }

    fn param_dim(&self) -> usize {
        self.degree + 1
    }

    /// Zero polynomial.
    fn init_params(&self, _stream: &mut RngStream) -> ParamVector {
        ParamVector::zeros(self.degree + 1)
    }

    fn sample_batch(&self, stream: &mut RngStream, batch_size: usize) -> Batch {
        polyreg_sample(stream, batch_size, self.noise_var)
    }

    fn loss(&self, params: &[f64], batch: &Batch) -> Result<f64> {
        self.check(params, batch)?;
        let total: f64 = batch
            .inputs()
            .iter()
            .zip(batch.targets())
            .map(|(&x, &y)| {
                let r = polyreg_model(params, x) - y;
                r * r
            })
            .sum();
        Ok(total / batch.rows() as f64)
    }

    fn loss_and_grad(&self, params: &[f64], batch: &Batch) -> Result<(f64, ParamVector)> {
        self.check(params, batch)?;
        let scale = 2.0 / batch.rows() as f64;
        let mut total = 0.0;
        let mut grad = ParamVector::zeros(params.len());
        for (&x, &y) in batch.inputs().iter().zip(batch.targets()) {
            let r = polyreg_model(params, x) - y;
            total += r * r;
            let mut power = 1.0;
            for g in grad.iter_mut() {
                *g += scale * r * power;
                power *= x;
            }
        }
        let loss = total / batch.rows() as f64;
        if !loss.is_finite() {
            return Err(Error::NonFinite {
                context: "polyreg loss",
                index: 0,
            });
        }
        Ok((loss, grad))
    }

    /// Relative L2 error against the noiseless `sin(pi x)`.
    fn test_error(&self, params: &[f64], stream: &mut RngStream, samples: usize) -> Result<f64> {
        if params.len() != self.degree + 1 {
            return Err(Error::shape(
                "polynomial coefficients",
                self.degree + 1,
                params.len(),
            ));
        }
        relative_l2_error(
            |pts: &[f64]| Ok(pts.iter().map(|&x| polyreg_model(params, x)).collect()),
            |x: &[f64]| libm::sin(PI * x[0]),
            |s: &mut RngStream, x: &mut [f64]| x[0] = s.uniform_unchecked(-1.0, 1.0),
            1,
            samples,
            stream,
        )
    }
}
