//! Deep Kolmogorov formulation of the heat equation
//! `du/dt = Laplace_x u`, `u(0, x) = |x|^2`.
//!
//! The solution satisfies `u(T, x) = E[ phi(x + sqrt(2T) Z) ]` with
//! `phi(y) = |y|^2` and `Z` standard normal, so regressing
//! `phi(xi + sqrt(2T) Z)` on uniformly drawn base points `xi` recovers
//! `u(T, .)` on the sampling box.

use serde::{Deserialize, Serialize};

use super::{relative_l2_error, StochasticObjective};
use crate::error::Result;
use crate::nn::{self, Activation, Batch, MlpSpec};
use crate::params::ParamVector;
use crate::prng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatDkmProblem {
    pub dim: usize,
    /// Final time `T`.
    pub horizon: f64,
    pub net: MlpSpec,
}

impl HeatDkmProblem {
    pub fn new(dim: usize, hidden: &[usize], horizon: f64) -> Result<Self> {
        let mut widths = vec![dim];
        widths.extend_from_slice(hidden);
        widths.push(1);
        Ok(HeatDkmProblem {
            dim,
            horizon,
            net: MlpSpec::new(widths, Activation::Gelu)?,
        })
    }

    /// d = 5, T = 2, hidden 32/32.
    pub fn desk() -> Self {
        Self::new(5, &[32, 32], 2.0).expect("valid desk spec")
    }

    /// d = 10, T = 2, hidden 50/100/50.
    pub fn full() -> Self {
        Self::new(10, &[50, 100, 50], 2.0).expect("valid full-size spec")
    }
}

/// `u(t, x) = |x|^2 + 2 d t`
pub fn exact_heat_solution(x: &[f64], t: f64, dim: usize) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() + 2.0 * dim as f64 * t
}

/// Draws `J` base points `xi ~ U([-1, 1]^d)`, then `J * d` normals, and
/// returns targets `|xi + sqrt(2T) Z|^2`.
pub fn heat_dkm_sample(
    stream: &mut RngStream,
    batch_size: usize,
    dim: usize,
    horizon: f64,
) -> Batch {
    let mut inputs = vec![0.0; batch_size * dim];
    stream.fill_uniform(&mut inputs, -1.0, 1.0);
    let mut noise = vec![0.0; batch_size * dim];
    stream.fill_standard_normal(&mut noise);
    let scale = (2.0 * horizon).sqrt();
    let targets = inputs
        .chunks_exact(dim)
        .zip(noise.chunks_exact(dim))
        .map(|(xi, z)| {
            xi.iter()
                .zip(z)
                .map(|(a, b)| {
                    let y = a + scale * b;
                    y * y
                })
                .sum()
        })
        .collect();
    Batch::new(inputs, dim, targets, 1).expect("heat batch shape")
}

impl StochasticObjective for HeatDkmProblem {
    fn name(&self) -> &'static str {
        "heat_dkm"
    }

    fn param_dim(&self) -> usize {
        self.net.param_count()
    }

    fn init_params(&self, stream: &mut RngStream) -> ParamVector {
        nn::init_params(&self.net, stream)
    }

    fn sample_batch(&self, stream: &mut RngStream, batch_size: usize) -> Batch {
        heat_dkm_sample(stream, batch_size, self.dim, self.horizon)
    }

    fn loss(&self, params: &[f64], batch: &Batch) -> Result<f64> {
        nn::mse_loss(&self.net, params, batch)
    }

    fn loss_and_grad(&self, params: &[f64], batch: &Batch) -> Result<(f64, ParamVector)> {
        nn::mse_loss_and_grad(&self.net, params, batch)
    }

    /// Relative L2 error against `u(T, .)` on `[-1, 1]^d`.
    fn test_error(&self, params: &[f64], stream: &mut RngStream, samples: usize) -> Result<f64> {
        relative_l2_error(
            |pts: &[f64]| nn::forward(&self.net, params, pts),
            |x: &[f64]| exact_heat_solution(x, self.horizon, self.dim),
            |s: &mut RngStream, x: &mut [f64]| s.fill_uniform(x, -1.0, 1.0),
            self.dim,
            samples,
            stream,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prng::derive_stream;
    use crate::problems::testing::{check_batch_mean, check_gradient};

    #[test]
    fn exact_solution_values() {
        assert_eq!(exact_heat_solution(&[0.0; 10], 2.0, 10), 40.0);
        assert_eq!(exact_heat_solution(&[1.0, -2.0], 0.0, 2), 5.0);
        assert_eq!(exact_heat_solution(&[1.0; 5], 2.0, 5), 25.0);
    }

    #[test]
    fn zero_horizon_targets_are_norms() {
        let mut s = derive_stream(1, 0);
        let b = heat_dkm_sample(&mut s, 100, 3, 0.0);
        for j in 0..b.rows() {
            let sq: f64 = b.input_row(j).iter().map(|v| v * v).sum();
            assert_eq!(b.target_row(j)[0], sq);
        }
    }

    #[test]
    fn targets_nonnegative_inputs_in_box() {
        let b = heat_dkm_sample(&mut derive_stream(2, 0), 2000, 5, 2.0);
        assert!(b.targets().iter().all(|&y| y >= 0.0));
        assert!(b.inputs().iter().all(|x| (-1.0..1.0).contains(x)));
    }

    #[test]
    fn gradient_matches_differences() {
        let p = HeatDkmProblem::new(3, &[4, 3], 2.0).unwrap();
        check_gradient(&p, 4, 5, 1e-5);
        check_batch_mean(&p, 5);
    }
}
