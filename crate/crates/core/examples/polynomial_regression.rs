//! Degree-25 polynomial fit of sin(pi x) from noisy samples, with Adam and
//! Adam+EMA side by side.

use padam::derive_stream;
use padam::harness::{run_experiment, ConfigOverrides};
use padam::optim::{adam_step, AdamState, HyperParams};
use padam::problems::polyreg_model;
use padam::problems::{PolyRegProblem, StochasticObjective};

fn main() -> padam::Result<()> {
    for optimizer in ["adam", "adam_ema"] {
        let config = ConfigOverrides {
            preset: Some("polyreg-desk".into()),
            optimizer: Some(optimizer.into()),
            steps: Some(10_000),
            ..ConfigOverrides::default()
        }
        .resolve()?;
        let result = run_experiment(&config)?;
        println!(
            "{optimizer:<9} final mean relative L2 error over {} seeds: {:.4e}",
            config.seeds,
            result.aggregate.final_mean_error.unwrap_or(f64::NAN)
        );
    }

    // the same fit by hand, then a look at the learned curve
    let problem = PolyRegProblem::default();
    let hp = HyperParams::default().with_lr(0.01);
    let mut theta = problem.init_params(&mut derive_stream(1, 0));
    let mut state = AdamState::new(theta.len());
    let mut train = derive_stream(1, 1);
    for _ in 0..10_000 {
        let g = problem.grad(&theta, &problem.sample_batch(&mut train, 256))?;
        adam_step(&mut state, &mut theta, &g, &hp)?;
    }
    for x in [-1.0, -0.5, 0.0, 0.25, 0.5, 1.0] {
        println!(
            "x = {x:>5}: model {:>8.4}, sin(pi x) {:>8.4}",
            polyreg_model(&theta, x),
            (std::f64::consts::PI * x).sin()
        );
    }
    Ok(())
}
