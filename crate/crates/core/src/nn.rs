//! Fully connected feed-forward networks on flat parameter vectors.
//!
//! Parameters are laid out layer by layer: the weight matrix of a layer in
//! row-major order (one row per output unit), then its bias vector. Hidden
//! layers apply the configured activation; the output layer is affine.
//!
//! Gradients of the batch-mean squared error are computed by hand-written
//! reverse-mode accumulation.

use serde::{Deserialize, Serialize};

use crate::error::{first_non_finite, Error, Result};
use crate::params::ParamVector;
use crate::prng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Gelu,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Gelu => gelu(x),
            Activation::Identity => x,
        }
    }

    /// Value and derivative at `x`, sharing the normal CDF for GELU.
    #[inline]
    pub fn apply_with_slope(self, x: f64) -> (f64, f64) {
        match self {
            Activation::Gelu => {
                let cdf = normal_cdf(x);
                (x * cdf, cdf + x * FRAC_1_SQRT_2PI * libm::exp(-0.5 * x * x))
            }
            other => (other.apply(x), other.derivative(x)),
        }
    }

    /// Derivative; ReLU uses 0 at exactly 0.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Gelu => gelu_derivative(x),
            Activation::Identity => 1.0,
        }
    }
}

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal CDF.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Exact GELU, `x * Phi(x)`.
#[inline]
pub fn gelu(x: f64) -> f64 {
    x * normal_cdf(x)
}

#[inline]
pub fn gelu_derivative(x: f64) -> f64 {
    normal_cdf(x) + x * FRAC_1_SQRT_2PI * libm::exp(-0.5 * x * x)
}

/// Layer widths `[d_in, h_1, ..., h_L, d_out]` plus the hidden activation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    widths: Vec<usize>,
    activation: Activation,
}

/// Offsets of one affine layer inside a [`ParamVector`].
#[derive(Debug, Clone, Copy)]
struct LayerSlot {
    fan_in: usize,
    fan_out: usize,
    weights: usize,
    bias: usize,
}

impl MlpSpec {
    pub fn new(widths: Vec<usize>, activation: Activation) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least input and output widths, got {widths:?}"
            )));
        }
        if widths.contains(&0) {
            return Err(Error::InvalidSpec(format!("zero width in {widths:?}")));
        }
        Ok(MlpSpec { widths, activation })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn layer_count(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.widths.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    fn slots(&self) -> impl Iterator<Item = LayerSlot> + '_ {
        let mut offset = 0;
        self.widths.windows(2).map(move |w| {
            let slot = LayerSlot {
                fan_in: w[0],
                fan_out: w[1],
                weights: offset,
                bias: offset + w[0] * w[1],
            };
            offset += (w[0] + 1) * w[1];
            slot
        })
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::shape(
                "mlp parameters",
                self.param_count(),
                params.len(),
            ));
        }
        Ok(())
    }
}

/// A mini-batch: `rows` input rows of width `input_dim` with matching target
/// rows of width `target_dim` (which may be 0 for objectives without targets).
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    inputs: Vec<f64>,
    targets: Vec<f64>,
    rows: usize,
    input_dim: usize,
    target_dim: usize,
}

impl Batch {
    pub fn new(
        inputs: Vec<f64>,
        input_dim: usize,
        targets: Vec<f64>,
        target_dim: usize,
    ) -> Result<Self> {
        if input_dim == 0 || inputs.is_empty() || !inputs.len().is_multiple_of(input_dim) {
            return Err(Error::shape("batch inputs", input_dim.max(1), inputs.len()));
        }
        let rows = inputs.len() / input_dim;
        if targets.len() != rows * target_dim {
            return Err(Error::shape(
                "batch targets",
                rows * target_dim,
                targets.len(),
            ));
        }
        Ok(Batch {
            inputs,
            targets,
            rows,
            input_dim,
            target_dim,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn input_row(&self, j: usize) -> &[f64] {
        &self.inputs[j * self.input_dim..(j + 1) * self.input_dim]
    }

    pub fn target_row(&self, j: usize) -> &[f64] {
        &self.targets[j * self.target_dim..(j + 1) * self.target_dim]
    }

    /// The single-sample batch at row `j`.
    pub fn row(&self, j: usize) -> Batch {
        Batch {
            inputs: self.input_row(j).to_vec(),
            targets: self.target_row(j).to_vec(),
            rows: 1,
            input_dim: self.input_dim,
            target_dim: self.target_dim,
        }
    }
}

/// Glorot-uniform weights, zero biases. Weights are drawn layer by layer in
/// storage order.
pub fn init_params(spec: &MlpSpec, stream: &mut RngStream) -> ParamVector {
    let mut params = ParamVector::zeros(spec.param_count());
    for slot in spec.slots() {
        let bound = (6.0 / (slot.fan_in + slot.fan_out) as f64).sqrt();
        let weights = &mut params[slot.weights..slot.bias];
        stream.fill_uniform(weights, -bound, bound);
    }
    params
}

/// `out[j, o] = bias[o] + sum_i w[o, i] * input[j, i]`
fn affine(slot: LayerSlot, params: &[f64], input: &[f64], rows: usize, out: &mut Vec<f64>) {
    out.clear();
    out.resize(rows * slot.fan_out, 0.0);
    let weights = &params[slot.weights..slot.bias];
    let bias = &params[slot.bias..slot.bias + slot.fan_out];
    for j in 0..rows {
        let x = &input[j * slot.fan_in..(j + 1) * slot.fan_in];
        let z = &mut out[j * slot.fan_out..(j + 1) * slot.fan_out];
        for (o, zo) in z.iter_mut().enumerate() {
            let w = &weights[o * slot.fan_in..(o + 1) * slot.fan_in];
            *zo = bias[o] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

fn input_rows(spec: &MlpSpec, inputs: &[f64]) -> Result<usize> {
    let d_in = spec.input_dim();
    if inputs.is_empty() || !inputs.len().is_multiple_of(d_in) {
        return Err(Error::shape("mlp inputs", d_in, inputs.len()));
    }
    Ok(inputs.len() / d_in)
}

/// Evaluates the network on a row-major `J x d_in` input matrix.
pub fn forward(spec: &MlpSpec, params: &[f64], inputs: &[f64]) -> Result<Vec<f64>> {
    spec.check_params(params)?;
    let rows = input_rows(spec, inputs)?;
    let last = spec.layer_count() - 1;
    let mut current = inputs.to_vec();
    let mut next = Vec::new();
    for (l, slot) in spec.slots().enumerate() {
        affine(slot, params, &current, rows, &mut next);
        if l < last {
            let act = spec.activation;
            next.iter_mut().for_each(|v| *v = act.apply(*v));
        }
        std::mem::swap(&mut current, &mut next);
    }
    Ok(current)
}

/// Batch-mean squared error `(1/J) sum_j |f(x_j) - y_j|^2`.
pub fn mse_loss(spec: &MlpSpec, params: &[f64], batch: &Batch) -> Result<f64> {
    check_batch(spec, batch)?;
    let out = forward(spec, params, batch.inputs())?;
    let loss = squared_error_sum(&out, batch.targets()) / batch.rows() as f64;
    if !loss.is_finite() {
        return Err(Error::NonFinite {
            context: "mse loss",
            index: spec.layer_count(),
        });
    }
    Ok(loss)
}

fn squared_error_sum(out: &[f64], targets: &[f64]) -> f64 {
    out.iter()
        .zip(targets)
        .map(|(o, t)| (o - t) * (o - t))
        .sum()
}

fn check_batch(spec: &MlpSpec, batch: &Batch) -> Result<()> {
    if batch.input_dim() != spec.input_dim() {
        return Err(Error::shape(
            "batch input width",
            spec.input_dim(),
            batch.input_dim(),
        ));
    }
    if batch.target_dim() != spec.output_dim() {
        return Err(Error::shape(
            "batch target width",
            spec.output_dim(),
            batch.target_dim(),
        ));
    }
    Ok(())
}

/// Loss and its exact gradient with respect to `params`.
///
/// Non-finite intermediates are reported with the index of the layer whose
/// output first went bad (`layer_count()` denotes the loss itself, and
/// gradient failures report the layer being differentiated).
pub fn mse_loss_and_grad(
    spec: &MlpSpec,
    params: &[f64],
    batch: &Batch,
) -> Result<(f64, ParamVector)> {
    spec.check_params(params)?;
    check_batch(spec, batch)?;
    let rows = batch.rows();
    let slots: Vec<LayerSlot> = spec.slots().collect();
    let last = slots.len() - 1;
    let act = spec.activation;

    // activations[l] is the input to layer l; slopes[l] the activation
    // derivative at the pre-activation of hidden layer l
    let mut activations: Vec<Vec<f64>> = Vec::with_capacity(slots.len());
    let mut slopes: Vec<Vec<f64>> = Vec::with_capacity(last);
    activations.push(batch.inputs().to_vec());
    let mut output = Vec::new();
    for (l, &slot) in slots.iter().enumerate() {
        let mut z = Vec::new();
        affine(slot, params, &activations[l], rows, &mut z);
        if first_non_finite(&z).is_some() {
            return Err(Error::NonFinite {
                context: "mlp forward",
                index: l,
            });
        }
        if l < last {
            let (a, d): (Vec<f64>, Vec<f64>) = z.iter().map(|&v| act.apply_with_slope(v)).unzip();
            activations.push(a);
            slopes.push(d);
        } else {
            output = z;
        }
    }

    let loss = squared_error_sum(&output, batch.targets()) / rows as f64;
    if !loss.is_finite() {
        return Err(Error::NonFinite {
            context: "mse loss",
            index: slots.len(),
        });
    }

    let scale = 2.0 / rows as f64;
    let mut delta: Vec<f64> = output
        .iter()
        .zip(batch.targets())
        .map(|(o, t)| scale * (o - t))
        .collect();
    let mut grad = ParamVector::zeros(params.len());
    for l in (0..slots.len()).rev() {
        let slot = slots[l];
        let input = &activations[l];
        {
            let (gw, gb) =
                grad[slot.weights..slot.bias + slot.fan_out].split_at_mut(slot.bias - slot.weights);
            for j in 0..rows {
                let x = &input[j * slot.fan_in..(j + 1) * slot.fan_in];
                let d = &delta[j * slot.fan_out..(j + 1) * slot.fan_out];
                for (o, &dv) in d.iter().enumerate() {
                    gb[o] += dv;
                    let row = &mut gw[o * slot.fan_in..(o + 1) * slot.fan_in];
                    for (g, &xi) in row.iter_mut().zip(x) {
                        *g += dv * xi;
                    }
                }
            }
        }
        if l > 0 {
            let weights = &params[slot.weights..slot.bias];
            let slope = &slopes[l - 1];
            let mut prev = vec![0.0; rows * slot.fan_in];
            for j in 0..rows {
                let d = &delta[j * slot.fan_out..(j + 1) * slot.fan_out];
                let p = &mut prev[j * slot.fan_in..(j + 1) * slot.fan_in];
                for (o, &dv) in d.iter().enumerate() {
                    let w = &weights[o * slot.fan_in..(o + 1) * slot.fan_in];
                    for (pi, &wi) in p.iter_mut().zip(w) {
                        *pi += dv * wi;
                    }
                }
                let srow = &slope[j * slot.fan_in..(j + 1) * slot.fan_in];
                for (pi, &si) in p.iter_mut().zip(srow) {
                    *pi *= si;
                }
            }
            delta = prev;
        }
        let layer_grad = &grad[slot.weights..slot.bias + slot.fan_out];
        if first_non_finite(layer_grad).is_some() {
            return Err(Error::NonFinite {
                context: "mlp gradient",
                index: l,
            });
        }
    }
    Ok((loss, grad))
}
