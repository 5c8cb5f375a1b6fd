//! Integral curves of `J∇H` for a smooth two-dimensional Hamiltonian: conservation of `H`
//! along RK4 paths and its fourth-order drift.

use hamtransport::checks::{pushforward_fixture, rk4_order};
use hamtransport::trajectories::{integrate_curves, step_limit};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (ham, _) = pushforward_fixture(32)?;
    let limit = step_limit(&ham);
    println!("step limit 1/(4 |u|_inf n) = {limit:.4e}");
    let ens = integrate_curves(&ham, &[vec![0.1, 0.2], vec![0.7, 0.45], vec![0.3, 0.9]], limit / 2.0, 1.0)?;
    for (c, path) in ens.paths.iter().enumerate() {
        let last = path.last().expect("nonempty path");
        println!("curve {c}: start {:?} end [{:.4}, {:.4}]", ens.starts[c], last[0], last[1]);
    }
    println!("max H drift: {:.3e}", ens.max_drift());
    let (steps, drifts) = rk4_order(&ham, 1.0, 4, 7)?;
    for (h, d) in steps.iter().zip(&drifts) {
        println!("h = {h:.4e}: drift {d:.4e}");
    }
    println!("ratios {:.2}, {:.2} (RK4: 16)", drifts[0] / drifts[1], drifts[1] / drifts[2]);
    Ok(())
}
