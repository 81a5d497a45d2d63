//! Deep Kolmogorov method for the heat equation on [-1, 1]^5 at T = 2.
//!
//! The network learns x -> u(T, x) = |x|^2 + 2 d T from samples of
//! |xi + sqrt(2T) Z|^2. Pass a step count to train longer.

use padam::harness::{run_with_objective, ConfigOverrides};
use padam::problems::{exact_heat_solution, HeatDkmProblem, StochasticObjective};

fn main() -> padam::Result<()> {
    let steps: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4000);
    let problem = HeatDkmProblem::desk();
    println!(
        "{}: {} parameters, u(T, 0) = {}",
        problem.name(),
        problem.param_dim(),
        exact_heat_solution(&[0.0; 5], 2.0, 5)
    );
    let config = ConfigOverrides {
        preset: Some("heat-dkm-desk".into()),
        optimizer: Some("padam3".into()),
        steps: Some(steps),
        ..ConfigOverrides::default()
    }
    .resolve()?;
    let series = run_with_objective(&config, &problem, 0)?;
    for row in series.rows.iter().filter(|r| r.step % config.n_t == 0) {
        if let Some(e) = row.error.finite() {
            println!(
                "{:<11} step {:>6} channel {:>2} relative L2 error {e:.4e}",
                row.optimizer, row.step, row.channel
            );
        }
    }
    Ok(())
}
