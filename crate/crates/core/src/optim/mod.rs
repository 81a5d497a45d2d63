//! Optimizer state machines driven by externally supplied gradients.
//!
//! Every step function mutates its parameter slice in place and rejects
//! non-finite gradients, so divergence surfaces as an error rather than as a
//! silently poisoned iterate.

mod adam;
mod padam;
mod schedule;
mod sgd;

use serde::{Deserialize, Serialize};

pub use adam::{adam_step, adamw_step, AdamState};
pub use padam::{ema_update, evaluate_and_select, padam_step, select_channel, PadamState};
pub use schedule::{
    adam_ema_channels, padam10_channels, padam3_channels, schedule_delta, ChannelKind, ChannelSpec,
};
pub use sgd::{momentum_sgd_step, sgd_step};

use crate::error::{first_non_finite, Error, Result};

/// Constant hyperparameters shared by all optimizers. Each optimizer reads
/// only the fields it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// First-moment decay.
    pub alpha: f64,
    /// Second-moment decay.
    pub beta: f64,
    /// Added to the root of the bias-corrected second moment.
    pub eps: f64,
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            alpha: 0.9,
            beta: 0.999,
            eps: 1e-8,
            lr: 0.01,
            momentum: 0.9,
            weight_decay: 0.01,
        }
    }
}

impl HyperParams {
    pub fn with_lr(self, lr: f64) -> Self {
        HyperParams { lr, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        fn unit(name: &'static str, value: f64) -> Result<()> {
            if (0.0..1.0).contains(&value) {
                Ok(())
            } else {
                Err(Error::InvalidHyperParameter {
                    name,
                    value,
                    reason: "must lie in [0, 1)",
                })
            }
        }
        unit("alpha", self.alpha)?;
        unit("beta", self.beta)?;
        unit("momentum", self.momentum)?;
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidHyperParameter {
                name: "eps",
                value: self.eps,
                reason: "must be positive",
            });
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidHyperParameter {
                name: "lr",
                value: self.lr,
                reason: "must be positive",
            });
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::InvalidHyperParameter {
                name: "weight_decay",
                value: self.weight_decay,
                reason: "must be non-negative",
            });
        }
        Ok(())
    }
}

fn check_step_inputs(params: &[f64], grad: &[f64]) -> Result<()> {
    if params.len() != grad.len() {
        return Err(Error::shape("optimizer gradient", params.len(), grad.len()));
    }
    if let Some(index) = first_non_finite(grad) {
        return Err(Error::NonFinite {
            context: "gradient",
            index,
        });
    }
    Ok(())
}

fn check_params_finite(params: &[f64]) -> Result<()> {
    match first_non_finite(params) {
        Some(index) => Err(Error::NonFinite {
            context: "parameters",
            index,
        }),
        None => Ok(()),
    }
}
