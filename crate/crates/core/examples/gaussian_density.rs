//! Fits a ReLU network to an unnormalised Gaussian density on [-2, 2]^5 with
//! PADAM10 and prints the reported channel at each log step.

use padam::harness::{run_single, ConfigOverrides};

fn main() -> padam::Result<()> {
    let config = ConfigOverrides {
        preset: Some("gauss-density-desk".into()),
        optimizer: Some("padam10".into()),
        steps: Some(3000),
        nt: Some(500),
        ..ConfigOverrides::default()
    }
    .resolve()?;
    let series = run_single(&config, 0)?;
    for row in series.rows_for("padam10") {
        println!(
            "step {:>5} channel {:>2} error {:?}",
            row.step, row.channel, row.error
        );
    }
    println!(
        "raw adam final error {:?}",
        series.final_error("padam10_raw")
    );
    Ok(())
}
