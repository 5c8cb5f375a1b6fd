//! Particles drawn from `ρ(0)` and advected along `J∇H` against the spectral transport
//! solution at `t = 1/2`.

use hamtransport::checks::pushforward_fixture;
use hamtransport::trajectories::pushforward_check;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (ham, rho) = pushforward_fixture(64)?;
    for n in [10_000, 100_000] {
        let rep = pushforward_check(&rho, &ham, n, 0.5, 3)?;
        println!(
            "{n:>7} particles: TV per axis {:.4?}, first-moment errors {:.4?}, second-moment error {:.4}, acceptance {:.3}",
            rep.tv, rep.first_moment_err, rep.second_moment_err, rep.acceptance_rate
        );
    }
    Ok(())
}
