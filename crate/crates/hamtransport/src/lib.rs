//! Finite-stage convex integration for the continuity equation `∂_tρ + div(ρu) = 0` driven by
//! an autonomous Hamiltonian field `u = J∇H` on the flat torus `T^d`.
//!
//! Modules, bottom up:
//! - [`field`]: periodic grids, spectral calculus, time families.
//! - [`profiles`]: bumps, cutoffs, the shell partition and the mollifier.
//! - [`geometry`]: the direction set, affine decomposition and disjoint placement.
//! - [`blocks`]: concentrated densities `Θ_ξ`, Hamiltonians `H_ξ` and fields `X_ξ`.
//! - [`antidiv`]: `∇Δ^{-1}` and the improved anti-divergence of `f g(λ·)`.
//! - [`scheme`]: parameter schedule, starting triples and the stage map `(ρ, H, R)_q → (ρ, H, R)_{q+1}`.
//! - [`trajectories`]: integral curves, the particle pushforward check and the `∫Hρ` decay report.
//! - [`io`]: run configs, `PFLD1` snapshots and the diagnostics CSV.
//! - [`checks`]: the verification suites used by the command-line tool and the acceptance run.

pub mod field;
pub mod geometry;
pub mod io;
pub mod antidiv;
pub mod blocks;
pub mod checks;
pub mod profiles;
pub mod scheme;
pub mod trajectories;
pub mod util;
