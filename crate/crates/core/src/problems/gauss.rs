use serde::{Deserialize, Serialize};

use super::{relative_l2_error, StochasticObjective};
use crate::error::Result;
use crate::nn::{self, Activation, Batch, MlpSpec};
use crate::params::ParamVector;
use crate::prng::RngStream;

/// Supervised regression of `x -> exp(-|x|^2 / (2 sigma^2))` on
/// `U([-2, 2]^d)` with a ReLU network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianDensityProblem {
    pub dim: usize,
    pub sigma2: f64,
    pub net: MlpSpec,
}

const HALF_WIDTH: f64 = 2.0;

impl GaussianDensityProblem {
    pub fn new(dim: usize, hidden: &[usize], sigma2: f64) -> Result<Self> {
        let mut widths = vec![dim];
        widths.extend_from_slice(hidden);
        widths.push(1);
        Ok(GaussianDensityProblem {
            dim,
            sigma2,
            net: MlpSpec::new(widths, Activation::Relu)?,
        })
    }

    /// d = 5 with two hidden layers of 32.
    pub fn desk() -> Self {
        Self::new(5, &[32, 32], 3.0).expect("valid desk spec")
    }

    /// d = 20 with hidden layers 300/500/100.
    pub fn full() -> Self {
        Self::new(20, &[300, 500, 100], 3.0).expect("valid full-size spec")
    }

    pub fn target(&self, x: &[f64]) -> f64 {
        let sq: f64 = x.iter().map(|v| v * v).sum();
        libm::exp(-sq / (2.0 * self.sigma2))
    }
}

impl StochasticObjective for GaussianDensityProblem {
    fn name(&self) -> &'static str {
        "gauss_density"
    }

    fn param_dim(&self) -> usize {
        self.net.param_count()
    }

    fn init_params(&self, stream: &mut RngStream) -> ParamVector {
        nn::init_params(&self.net, stream)
    }

    fn sample_batch(&self, stream: &mut RngStream, batch_size: usize) -> Batch {
        let mut inputs = vec![0.0; batch_size * self.dim];
        stream.fill_uniform(&mut inputs, -HALF_WIDTH, HALF_WIDTH);
        let targets = inputs
            .chunks_exact(self.dim)
            .map(|x| self.target(x))
            .collect();
        Batch::new(inputs, self.dim, targets, 1).expect("gauss batch shape")
    }

    fn loss(&self, params: &[f64], batch: &Batch) -> Result<f64> {
        nn::mse_loss(&self.net, params, batch)
    }

    fn loss_and_grad(&self, params: &[f64], batch: &Batch) -> Result<(f64, ParamVector)> {
        nn::mse_loss_and_grad(&self.net, params, batch)
    }

    fn test_error(&self, params: &[f64], stream: &mut RngStream, samples: usize) -> Result<f64> {
        relative_l2_error(
            |pts: &[f64]| nn::forward(&self.net, params, pts),
            |x: &[f64]| self.target(x),
            |s: &mut RngStream, x: &mut [f64]| s.fill_uniform(x, -HALF_WIDTH, HALF_WIDTH),
            self.dim,
            samples,
            stream,
        )
    }
}
