//! PADAM3 against plain Adam on the noisy quadratic, driven step by step.
//!
//! ```text
//! cargo run --release --example quadratic_padam
//! ```

use padam::derive_stream;
use padam::optim::{
    adam_step, evaluate_and_select, padam3_channels, padam_step, AdamState, HyperParams, PadamState,
};
use padam::problems::{QuadraticProblem, StochasticObjective};

fn main() -> padam::Result<()> {
    let steps = 5000;
    let n_t = 500;
    let problem = QuadraticProblem::new(10);
    let hp = HyperParams::default().with_lr(0.01);

    let theta0 = problem.init_params(&mut derive_stream(0, 0));
    let mut padam = PadamState::new(theta0.clone(), padam3_channels(steps)?)?;
    let mut adam = AdamState::new(theta0.len());
    let mut theta = theta0;

    // Same training stream for both, so the raw PADAM iterate tracks Adam exactly.
    let mut train_a = derive_stream(0, 1);
    let mut train_b = derive_stream(0, 1);
    let mut selection = derive_stream(0, 2);

    println!(
        "{:>6} {:>12} {:>12} {:>8}",
        "step", "adam", "padam3", "channel"
    );
    for step in 1..=steps {
        let g = problem.grad(padam.raw(), &problem.sample_batch(&mut train_a, 256))?;
        padam_step(&mut padam, &g, &hp)?;
        let g = problem.grad(&theta, &problem.sample_batch(&mut train_b, 256))?;
        adam_step(&mut adam, &mut theta, &g, &hp)?;

        if step % n_t == 0 {
            evaluate_and_select(&mut padam, &problem, &mut selection, 256)?;
            let mut test = derive_stream(0, 3);
            let e_adam = problem.test_error(&theta, &mut test.clone(), 0)?;
            let e_padam = problem.test_error(padam.selected(), &mut test, 0)?;
            println!(
                "{step:>6} {e_adam:>12.4e} {e_padam:>12.4e} {:>8}",
                padam.best_index()
            );
        }
    }
    assert_eq!(padam.raw().as_slice(), theta.as_slice());
    Ok(())
}
