use super::{check_params_finite, check_step_inputs, HyperParams};
use crate::error::{Error, Result};

/// `params <- params - lr * grad`
pub fn sgd_step(params: &mut [f64], grad: &[f64], hp: &HyperParams) -> Result<()> {
    check_step_inputs(params, grad)?;
    for (p, g) in params.iter_mut().zip(grad) {
        *p -= hp.lr * g;
    }
    check_params_finite(params)
}

/// Heavy-ball SGD: `velocity <- momentum * velocity + grad`, then
/// `params <- params - lr * velocity`. Start from a zero velocity.
pub fn momentum_sgd_step(
    velocity: &mut [f64],
    params: &mut [f64],
    grad: &[f64],
    hp: &HyperParams,
) -> Result<()> {
    check_step_inputs(params, grad)?;
    if velocity.len() != params.len() {
        return Err(Error::shape(
            "momentum velocity",
            params.len(),
            velocity.len(),
        ));
    }
    for ((v, p), g) in velocity.iter_mut().zip(params.iter_mut()).zip(grad) {
        *v = hp.momentum * *v + g;
        *p -= hp.lr * *v;
    }
    check_params_finite(params)
}
