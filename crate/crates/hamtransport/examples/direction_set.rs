//! Builds the d = 4 direction set, prints its frames and offsets, decomposes a few unit
//! vectors and checks cylinder disjointness around the minimal concentration.

use hamtransport::geometry::{build_direction_set, decompose, reconstruct, verify_disjoint_supports};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = build_direction_set(4, 0.125)?;
    println!("{} directions, rho = {}, mu0 = {:.4}, min axis separation = {:.4}", ds.len(), ds.rho, ds.mu0, ds.min_separation);
    for (i, dir) in ds.directions.iter().enumerate() {
        let perp: Vec<String> = dir.frame[1].iter().map(|r| r.to_string()).collect();
        let off: Vec<String> = dir.offset.iter().map(|r| r.to_string()).collect();
        println!("  {i}: xi = {:?}  xi_perp = [{}]  offset = [{}]", dir.xi_f64(), perp.join(", "), off.join(", "));
    }
    for r in [[1.0, 0.0, 0.0, 0.0], [0.5, -0.5, 0.5, 0.5], [0.6, 0.0, -0.8, 0.0]] {
        let a = decompose(&ds, &r)?;
        let back = reconstruct(&ds, &a);
        println!("R = {r:?}\n  a = {a:.3?}\n  sum a xi = {back:.3?}");
    }
    for mu in [ds.mu0 * 0.9, ds.mu0 * 1.01, 4.0] {
        let rep = verify_disjoint_supports(&ds, mu);
        let worst = rep.pairs.iter().map(|p| p.exact).fold(f64::INFINITY, f64::min);
        println!("mu = {mu:.3}: disjoint = {}, smallest exact margin = {worst:.4}", rep.pass);
    }
    Ok(())
}
