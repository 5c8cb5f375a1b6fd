//! One convex-integration stage `0 → 1` from the transport starting triple in tame mode,
//! printing every diagnostic. Parameters are `key=value` arguments; the defaults are the
//! structural configuration (d = 4, n = 32, n_t = 16, a = 2, b = 2, γ = 1, α = 2).
//!
//! `cargo run --release --example iterate_stage -- beta=0.7 rho=0.2 lambda0=2`

use hamtransport::field::GridSpec;
use hamtransport::geometry::build_direction_set;
use hamtransport::scheme::{initial_triple_tce, iterate, make_schedule, Mode, Overrides, StageDiagnostics};
use std::collections::HashMap;
use std::time::Instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut kv: HashMap<String, f64> = HashMap::new();
    for a in std::env::args().skip(1) {
        let (k, v) = a.split_once('=').ok_or_else(|| format!("expected key=value, got {a}"))?;
        kv.insert(k.to_string(), v.parse()?);
    }
    let get = |k: &str, d: f64| kv.get(k).copied().unwrap_or(d);
    let start = Instant::now();
    let grid = GridSpec::new(4, get("n", 32.0) as usize, get("n_t", 16.0) as usize)?;
    let overrides = Overrides {
        b: Some(get("b", 2.0)),
        beta: Some(get("beta", 0.7)),
        alpha: Some(get("alpha", 2.0)),
        gamma: Some(get("gamma", 1.0)),
    };
    let schedule = make_schedule(get("p", 2.0), get("r", 1.0), 4, get("a", 2.0), Mode::Tame, overrides)?;
    print!("{}", schedule.describe(1));
    let ds = build_direction_set(4, get("rho", 0.2))?;
    let s0 = initial_triple_tce(grid, get("lambda0", 2.0) as usize)?;
    println!("stage 0 residual: rel {:.3e}", s0.residual().relative());
    let s1 = iterate(&s0, &schedule, &ds)?;
    let d = s1.diagnostics.last().expect("one stage");
    for (k, v) in StageDiagnostics::COLUMNS.iter().zip(d.row()) {
        println!("{k:>18} = {v}");
    }
    println!("decrease factor ||R0||/||R1|| = {:.3}, ||R_ell||/||R1|| = {:.3}", d.l1_r_prev / d.l1_r, d.l1_r_ell / d.l1_r);
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
