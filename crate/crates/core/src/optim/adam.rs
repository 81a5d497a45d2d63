use serde::{Deserialize, Serialize};

use super::{check_params_finite, check_step_inputs, HyperParams};
use crate::error::{Error, Result};

/// Moment estimates and bias-correction products of an Adam run.
///
/// `prod_alpha` and `prod_beta` hold the running products of the decay
/// factors, so schedules with step-dependent decays would telescope the same
/// way as constant ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub n: u64,
    pub prod_alpha: f64,
    pub prod_beta: f64,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        AdamState {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            n: 0,
            prod_alpha: 1.0,
            prod_beta: 1.0,
        }
    }
}

/// One Adam step:
///
/// ```text
/// m  <- alpha m + (1 - alpha) g
/// v  <- beta v + (1 - beta) g^2
/// p  <- p - lr * [m / (1 - prod alpha)] / (eps + sqrt(v / (1 - prod beta)))
/// ```
///
/// `eps` sits outside the square root. `grad` must already be averaged over
/// the mini-batch.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut [f64],
    grad: &[f64],
    hp: &HyperParams,
) -> Result<()> {
    hp.validate()?;
    check_step_inputs(params, grad)?;
    if state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(Error::shape("adam state", params.len(), state.m.len()));
    }
    let prod_alpha = state.prod_alpha * hp.alpha;
    let prod_beta = state.prod_beta * hp.beta;
    let m_scale = 1.0 - prod_alpha;
    let v_scale = 1.0 - prod_beta;
    if m_scale == 0.0 {
        return Err(Error::InvalidHyperParameter {
            name: "alpha",
            value: hp.alpha,
            reason: "bias correction divides by zero",
        });
    }
    if v_scale == 0.0 {
        return Err(Error::InvalidHyperParameter {
            name: "beta",
            value: hp.beta,
            reason: "bias correction divides by zero",
        });
    }
    state.n += 1;
    state.prod_alpha = prod_alpha;
    state.prod_beta = prod_beta;
    for (((p, m), v), &g) in params
        .iter_mut()
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
        .zip(grad)
    {
        *m = hp.alpha * *m + (1.0 - hp.alpha) * g;
        *v = hp.beta * *v + (1.0 - hp.beta) * g * g;
        let m_hat = *m / m_scale;
        let v_hat = *v / v_scale;
        *p -= hp.lr * m_hat / (hp.eps + v_hat.sqrt());
    }
    check_params_finite(params)
}

/// Adam followed by decoupled weight decay: the decay term uses the
/// parameters from before the Adam update and never enters the moments.
pub fn adamw_step(
    state: &mut AdamState,
    params: &mut [f64],
    grad: &[f64],
    hp: &HyperParams,
) -> Result<()> {
    if hp.weight_decay == 0.0 {
        return adam_step(state, params, grad, hp);
    }
    let before = params.to_vec();
    adam_step(state, params, grad, hp)?;
    let decay = hp.lr * hp.weight_decay;
    for (p, b) in params.iter_mut().zip(&before) {
        *p -= decay * b;
    }
    check_params_finite(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(alpha: f64, beta: f64, lr: f64) -> HyperParams {
        HyperParams {
            alpha,
            beta,
            lr,
            eps: 1e-8,
            ..HyperParams::default()
        }
    }

    #[test]
    fn zero_gradient_first_step_keeps_params() {
        let mut st = AdamState::new(2);
        let mut p = vec![0.5, -1.5];
        adam_step(&mut st, &mut p, &[0.0, 0.0], &HyperParams::default()).unwrap();
        assert_eq!(p, vec![0.5, -1.5]);
        assert_eq!(st.n, 1);
    }

    #[test]
    fn first_step_hand_value() {
        let mut st = AdamState::new(1);
        let mut p = vec![0.0];
        adam_step(&mut st, &mut p, &[2.0], &hp(0.9, 0.999, 0.01)).unwrap();
        // m_hat = 2, v_hat = 4
        let expected = -0.01 * 2.0 / (1e-8 + 2.0);
        assert!((p[0] - expected).abs() < 1e-17);
        assert!((p[0] + 0.009_999_999_95).abs() < 1e-12);
    }

    #[test]
    fn sign_descent_limit() {
        let mut st = AdamState::new(3);
        let mut p = vec![0.0; 3];
        let g = [3.0, -0.5, 1e-3];
        let h = hp(0.0, 0.0, 0.1);
        adam_step(&mut st, &mut p, &g, &h).unwrap();
        for (pi, gi) in p.iter().zip(&g) {
            let expected = -0.1 * gi / (1e-8 + gi.abs());
            assert!((pi - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_decay_rejected() {
        let mut st = AdamState::new(1);
        let mut p = vec![0.0];
        let bad = HyperParams {
            alpha: 1.0,
            ..HyperParams::default()
        };
        assert!(matches!(
            adam_step(&mut st, &mut p, &[1.0], &bad),
            Err(Error::InvalidHyperParameter { name: "alpha", .. })
        ));
        assert_eq!(st.n, 0);
    }

    #[test]
    fn adamw_without_decay_is_adam() {
        let g = [0.3, -2.0];
        let mut a = vec![1.0, 2.0];
        let mut b = a.clone();
        let mut sa = AdamState::new(2);
        let mut sb = AdamState::new(2);
        let h = HyperParams {
            weight_decay: 0.0,
            ..HyperParams::default()
        };
        for _ in 0..4 {
            adam_step(&mut sa, &mut a, &g, &h).unwrap();
            adamw_step(&mut sb, &mut b, &g, &h).unwrap();
        }
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }

    #[test]
    fn adamw_pure_decay() {
        let mut st = AdamState::new(1);
        let mut p = vec![1.0];
        let h = HyperParams {
            lr: 0.01,
            weight_decay: 0.01,
            ..HyperParams::default()
        };
        adamw_step(&mut st, &mut p, &[0.0], &h).unwrap();
        assert!((p[0] - 0.9999).abs() < 1e-15);
    }

    #[test]
    fn adamw_is_decoupled_not_l2() {
        // coupled L2 would feed wd * p into the gradient before the moments
        let h = HyperParams {
            lr: 0.1,
            weight_decay: 0.5,
            ..HyperParams::default()
        };
        let g = [0.2];
        let mut decoupled = vec![2.0];
        let mut st = AdamState::new(1);
        adamw_step(&mut st, &mut decoupled, &g, &h).unwrap();

        let mut coupled = vec![2.0];
        let mut st2 = AdamState::new(1);
        let g2 = [g[0] + h.weight_decay * coupled[0]];
        adam_step(&mut st2, &mut coupled, &g2, &h).unwrap();

        // decoupled: 2 - 0.1 * 0.2 / (eps + 0.2) - 0.1 * 0.5 * 2
        let expected = 2.0 - 0.1 * 0.2 / (1e-8 + 0.2) - 0.1;
        assert!((decoupled[0] - expected).abs() < 1e-14);
        assert!((decoupled[0] - coupled[0]).abs() > 1e-3);
    }
}
