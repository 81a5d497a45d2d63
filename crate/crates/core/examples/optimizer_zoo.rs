//! Every optimizer on the same quadratic problem and seeds, writing CSV and
//! aggregate JSON files into a directory (default: ./zoo-out).

use std::path::PathBuf;

use padam::harness::{run_experiment, ConfigOverrides, OptimizerKind};

fn main() -> padam::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| "zoo-out".into());
    for optimizer in OptimizerKind::ALL {
        let config = ConfigOverrides {
            problem: Some("quadratic".into()),
            optimizer: Some(optimizer.id().into()),
            steps: Some(5000),
            seeds: Some(4),
            out: Some(out.clone()),
            ..ConfigOverrides::default()
        }
        .resolve()?;
        let result = run_experiment(&config)?;
        println!(
            "{:<9} lr {:<6} final mean error {:.4e}  diverged {}",
            optimizer.id(),
            config.hyper.lr,
            result.aggregate.final_mean_error.unwrap_or(f64::NAN),
            result.aggregate.diverged_seed_count
        );
    }
    println!("files written to {}", out.display());
    Ok(())
}
