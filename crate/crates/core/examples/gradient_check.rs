//! Compares backprop gradients of a small MLP with central differences.

use padam::derive_stream;
use padam::nn::{init_params, mse_loss, mse_loss_and_grad, Activation, Batch, MlpSpec};

fn main() -> padam::Result<()> {
    let h = 1e-4;
    for act in [Activation::Relu, Activation::Gelu, Activation::Identity] {
        let spec = MlpSpec::new(vec![3, 8, 8, 2], act)?;
        let mut s = derive_stream(11, 0);
        let params = init_params(&spec, &mut s);
        let inputs: Vec<f64> = (0..5 * 3).map(|_| s.standard_normal()).collect();
        let targets: Vec<f64> = (0..5 * 2).map(|_| s.standard_normal()).collect();
        let batch = Batch::new(inputs, 3, targets, 2)?;

        let (loss, grad) = mse_loss_and_grad(&spec, &params, &batch)?;
        let mut probe = params.to_vec();
        let mut worst: f64 = 0.0;
        for i in 0..probe.len() {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = mse_loss(&spec, &probe, &batch)?;
            probe[i] = orig - h;
            let down = mse_loss(&spec, &probe, &batch)?;
            probe[i] = orig;
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1.0));
        }
        println!(
            "{act:?}: {} params, loss {loss:.6}, worst relative gradient error {worst:.2e}",
            spec.param_count()
        );
    }
    Ok(())
}
