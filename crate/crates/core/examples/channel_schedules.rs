//! Prints the averaging weight of every PADAM channel at a few steps.

use padam::optim::{adam_ema_channels, padam10_channels, padam3_channels, ChannelSpec};

fn show(name: &str, specs: &[ChannelSpec], horizon: u64) {
    println!("{name} (N = {horizon})");
    let steps = [1, 10, 100, horizon / 2, horizon];
    print!("{:>4}", "k");
    for n in steps {
        print!(" {:>12}", format!("n={n}"));
    }
    println!();
    for (k, spec) in specs.iter().enumerate() {
        print!("{:>4}", k + 1);
        for n in steps {
            print!(" {:>12.8}", spec.delta(n));
        }
        println!();
    }
    println!();
}

fn main() -> padam::Result<()> {
    let horizon = 20_000;
    show("adam_ema", &adam_ema_channels(horizon)?, horizon);
    show("padam3", &padam3_channels(horizon)?, horizon);
    show("padam10", &padam10_channels(horizon, false)?, horizon);
    // channel 6 taken literally and clamped: it collapses to 0 from n = 3 on
    show(
        "padam10 (literal channel 6)",
        &padam10_channels(horizon, true)?,
        horizon,
    );
    Ok(())
}
