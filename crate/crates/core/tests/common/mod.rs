//! Test-only oracles, kept independent of the library's code paths.

#![allow(dead_code)]

use padam::nn::{Activation, Batch, MlpSpec};
use padam::RngStream;

/// Straight-line Adam: recomputes the decay products from scratch each step
/// and keeps every intermediate in its own variable.
pub fn reference_adam(
    theta0: &[f64],
    grads: &[Vec<f64>],
    alpha: f64,
    beta: f64,
    lr: f64,
    eps: f64,
) -> Vec<Vec<f64>> {
    let d = theta0.len();
    let mut theta = theta0.to_vec();
    let mut m = vec![0.0; d];
    let mut v = vec![0.0; d];
    let mut trajectory = Vec::with_capacity(grads.len());
    for (step, g) in grads.iter().enumerate() {
        let n = step + 1;
        let mut alpha_prod = 1.0;
        let mut beta_prod = 1.0;
        for _ in 1..=n {
            alpha_prod *= alpha;
            beta_prod *= beta;
        }
        for i in 0..d {
            m[i] = alpha * m[i] + (1.0 - alpha) * g[i];
            v[i] = beta * v[i] + (1.0 - beta) * g[i] * g[i];
            let root = (v[i] / (1.0 - beta_prod)).sqrt();
            let corrected_first = m[i] / (1.0 - alpha_prod);
            theta[i] -= lr * (1.0 / (eps + root)) * corrected_first;
        }
        trajectory.push(theta.clone());
    }
    trajectory
}

/// Independent forward pass returning output and hidden pre-activations.
pub fn reference_forward(
    widths: &[usize],
    act: Activation,
    params: &[f64],
    x: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let mut cursor = 0;
    let mut current = x.to_vec();
    let mut pre = Vec::new();
    let layers = widths.len() - 1;
    for l in 0..layers {
        let (fan_in, fan_out) = (widths[l], widths[l + 1]);
        let w = &params[cursor..cursor + fan_in * fan_out];
        let b = &params[cursor + fan_in * fan_out..cursor + (fan_in + 1) * fan_out];
        cursor += (fan_in + 1) * fan_out;
        let mut next = vec![0.0; fan_out];
        for o in 0..fan_out {
            let mut z = b[o];
            for i in 0..fan_in {
                z += w[o * fan_in + i] * current[i];
            }
            next[o] = z;
        }
        if l + 1 < layers {
            pre.extend_from_slice(&next);
            for z in next.iter_mut() {
                *z = match act {
                    Activation::Relu => z.max(0.0),
                    Activation::Identity => *z,
                    Activation::Gelu => *z * 0.5 * (1.0 + libm::erf(*z / std::f64::consts::SQRT_2)),
                };
            }
        }
        current = next;
    }
    (current, pre)
}

/// Batch-mean squared error via [`reference_forward`].
pub fn reference_mse(spec: &MlpSpec, params: &[f64], batch: &Batch) -> f64 {
    let mut total = 0.0;
    for j in 0..batch.rows() {
        let (out, _) =
            reference_forward(spec.widths(), spec.activation(), params, batch.input_row(j));
        for (o, t) in out.iter().zip(batch.target_row(j)) {
            total += (o - t) * (o - t);
        }
    }
    total / batch.rows() as f64
}

/// Central differences of `f` at `x` with step `h`.
pub fn central_differences(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Componentwise relative error with a floor on the magnitude so that
/// components that are zero up to rounding compare absolutely.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// A random network, parameter vector and batch with widths and batch size
/// at most 8.
pub fn random_mlp_case(stream: &mut RngStream, act: Activation) -> (MlpSpec, Vec<f64>, Batch) {
    let depth = 2 + (stream.next_u64() % 3) as usize;
    let widths: Vec<usize> = (0..depth)
        .map(|_| 1 + (stream.next_u64() % 8) as usize)
        .collect();
    let spec = MlpSpec::new(widths, act).unwrap();
    let params: Vec<f64> = (0..spec.param_count())
        .map(|_| stream.standard_normal() * 0.7)
        .collect();
    let rows = 1 + (stream.next_u64() % 8) as usize;
    let inputs: Vec<f64> = (0..rows * spec.input_dim())
        .map(|_| stream.standard_normal())
        .collect();
    let targets: Vec<f64> = (0..rows * spec.output_dim())
        .map(|_| stream.standard_normal())
        .collect();
    let batch = Batch::new(inputs, spec.input_dim(), targets, spec.output_dim()).unwrap();
    (spec, params, batch)
}

/// Smallest |pre-activation| over the batch, for ReLU kink exclusion.
pub fn min_abs_preactivation(spec: &MlpSpec, params: &[f64], batch: &Batch) -> f64 {
    (0..batch.rows())
        .flat_map(|j| {
            reference_forward(spec.widths(), spec.activation(), params, batch.input_row(j)).1
        })
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min)
}
