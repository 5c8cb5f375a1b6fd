//! Starting triple of the Hamiltonian-decay construction: `∫Hρ` at the two ends of the time
//! interval and the bound chain for `λ0 = 40`, `Δ = 1/32`.

use hamtransport::field::GridSpec;
use hamtransport::scheme::initial_triple_hamil;
use hamtransport::trajectories::hamiltonian_decay_report;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = GridSpec::new(2, 256, 5)?;
    let s0 = initial_triple_hamil(g, 40, 1.0 / 32.0)?;
    let res = s0.residual();
    println!("stage-0 residual: rel {:.3e}, divergence-free part removed {:.3e}", res.relative(), res.relative_projected());
    let rep = hamiltonian_decay_report(std::slice::from_ref(&s0))?;
    for r in &rep.rows {
        println!("q = {}: int H rho(0) = {:.10}, int H rho(1) = {:.10}, gap = {:.10}", r.q, r.at_start, r.at_end, r.gap());
    }
    let b = &rep.bounds;
    println!("2/lambda0 = {:.4}, 8 Delta = {:.4}", b.two_over_lambda, b.eight_delta);
    println!("1 > 2/lambda0 + 8 Delta: {}", b.unit_bound_holds());
    println!("1 - Delta > 2/lambda0 + 8 Delta: {}", b.gap_bound_holds());
    Ok(())
}
