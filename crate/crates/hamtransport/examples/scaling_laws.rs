//! Fits log-log slopes of block norms against the concentration and compares them with
//! the predicted exponents.

use hamtransport::blocks::{dual_exponent, measure_scaling};
use hamtransport::geometry::build_direction_set;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = build_direction_set(4, 0.125)?;
    let p = 3.0;
    let pp = dual_exponent(p);
    println!("p = {p}, p' = {pp:.3}, mu in {{4, 8, 16}}, 512 transverse points per axis");
    println!("field  k  s      slope     predicted");
    for (k, s) in [(0, 1.0), (0, p), (0, pp), (1, p), (0, f64::INFINITY)] {
        for fit in measure_scaling(&ds, 1.0, p, s, k, &[4.0, 8.0, 16.0], 512)? {
            println!("{:<6} {k}  {s:<6.3} {:>8.4}  {:>8.4}", fit.field.name(), fit.slope, fit.predicted);
        }
    }
    Ok(())
}
