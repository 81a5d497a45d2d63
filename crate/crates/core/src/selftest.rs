//! Fast invariant checks runnable from the command line.

use crate::harness::{role_stream, StreamRole};
use crate::nn::{self, Activation, Batch, MlpSpec};
use crate::optim::{
    adam_step, padam10_channels, padam3_channels, padam_step, select_channel, AdamState,
    ChannelKind, ChannelSpec, HyperParams, PadamState,
};
use crate::prng::derive_stream;
use crate::problems::{QuadraticProblem, StochasticObjective};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, result: Result<String, String>) -> CheckOutcome {
    match result {
        Ok(detail) => CheckOutcome {
            name,
            passed: true,
            detail,
        },
        Err(detail) => CheckOutcome {
            name,
            passed: false,
            detail,
        },
    }
}

fn prng_replay() -> Result<String, String> {
    let mut a = derive_stream(42, 7);
    let mut b = derive_stream(42, 7);
    for i in 0..1000 {
        if a.standard_normal().to_bits() != b.standard_normal().to_bits() {
            return Err(format!("streams diverged at draw {i}"));
        }
    }
    Ok("1000 identical normal draws".into())
}

fn adam_eps_placement() -> Result<String, String> {
    // v_hat = eps^2 after one step with g = eps, alpha = beta = 0
    let eps = 1e-8;
    let hp = HyperParams {
        alpha: 0.0,
        beta: 0.0,
        eps,
        lr: 1.0,
        ..HyperParams::default()
    };
    let mut state = AdamState::new(1);
    let mut p = vec![0.0];
    adam_step(&mut state, &mut p, &[eps], &hp).map_err(|e| e.to_string())?;
    let outside = -eps / (eps + eps);
    let inside = -eps / (eps * eps + eps).sqrt();
    if (p[0] - outside).abs() > 1e-15 {
        return Err(format!("update {} != {outside}", p[0]));
    }
    Ok(format!(
        "update {:.6} (root-inside form would give {inside:.3e})",
        p[0]
    ))
}

fn mlp_gradient() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for (k, act) in [Activation::Identity, Activation::Gelu, Activation::Relu]
        .into_iter()
        .enumerate()
    {
        let spec = MlpSpec::new(vec![3, 4, 2], act).map_err(|e| e.to_string())?;
        let mut s = derive_stream(100 + k as u64, 0);
        let mut params = nn::init_params(&spec, &mut s);
        for v in params.iter_mut() {
            *v += 0.1 * s.standard_normal();
        }
        let mut inputs = vec![0.0; 15];
        s.fill_standard_normal(&mut inputs);
        let mut targets = vec![0.0; 10];
        s.fill_standard_normal(&mut targets);
        let batch = Batch::new(inputs, 3, targets, 2).map_err(|e| e.to_string())?;
        let (_, grad) = nn::mse_loss_and_grad(&spec, &params, &batch).map_err(|e| e.to_string())?;
        let h = 1e-5;
        for i in 0..params.len() {
            let mut up = params.clone();
            up[i] += h;
            let mut down = params.clone();
            down[i] -= h;
            let fd = (nn::mse_loss(&spec, &up, &batch).unwrap()
                - nn::mse_loss(&spec, &down, &batch).unwrap())
                / (2.0 * h);
            let rel = (fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-3);
            worst = worst.max(rel);
        }
    }
    if worst > 1e-5 {
        return Err(format!("worst relative gradient error {worst:.2e}"));
    }
    Ok(format!("worst relative gradient error {worst:.2e}"))
}

fn schedules() -> Result<String, String> {
    padam3_channels(10_000).map_err(|e| e.to_string())?;
    padam10_channels(10_000, false).map_err(|e| e.to_string())?;
    padam10_channels(10_000, true).map_err(|e| e.to_string())?;
    if ChannelSpec::new(ChannelKind::PolynomialGap { c: 0.5, p: -0.7 }, 10).is_ok() {
        return Err("unclamped printed channel 6 accepted".into());
    }
    Ok("13 channels valid on 1..=10000".into())
}

fn padam_raw_is_adam() -> Result<String, String> {
    let problem = QuadraticProblem::new(10);
    let hp = HyperParams::default();
    let theta0 = problem.init_params(&mut role_stream(5, StreamRole::Init));
    let mut padam = PadamState::new(theta0.clone(), padam3_channels(500).unwrap()).unwrap();
    let mut adam = AdamState::new(theta0.len());
    let mut theta = theta0;
    let mut s1 = role_stream(5, StreamRole::Train);
    let mut s2 = role_stream(5, StreamRole::Train);
    for step in 1..=500 {
        let b1 = problem.sample_batch(&mut s1, 64);
        let b2 = problem.sample_batch(&mut s2, 64);
        let g1 = problem.grad(padam.raw(), &b1).map_err(|e| e.to_string())?;
        let g2 = problem.grad(&theta, &b2).map_err(|e| e.to_string())?;
        padam_step(&mut padam, &g1, &hp).map_err(|e| e.to_string())?;
        adam_step(&mut adam, &mut theta, &g2, &hp).map_err(|e| e.to_string())?;
        if padam.raw().as_slice() != theta.as_slice() {
            return Err(format!("raw iterate differs at step {step}"));
        }
    }
    Ok("500 steps bitwise identical".into())
}

fn selection() -> Result<String, String> {
    let cases: [(&[f64], usize); 3] = [
        (&[3.0, 1.0, 2.0], 2),
        (&[1.0, 1.0, 1.0], 1),
        (&[f64::NAN, 5.0], 2),
    ];
    for (losses, expected) in cases {
        let got = select_channel(losses).map_err(|e| e.to_string())?;
        if got != expected {
            return Err(format!("{losses:?} selected {got}, expected {expected}"));
        }
    }
    Ok("argmin, tie-break and NaN exclusion".into())
}

/// Runs every check in a fixed order.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        outcome("prng replay", prng_replay()),
        outcome("adam eps placement", adam_eps_placement()),
        outcome("mlp gradient", mlp_gradient()),
        outcome("channel schedules", schedules()),
        outcome("padam raw equals adam", padam_raw_is_adam()),
        outcome("channel selection", selection()),
    ]
}
