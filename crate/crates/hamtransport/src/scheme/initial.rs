//! Starting triples `(ρ_0, H_0, R_0)`.

use super::{IterationState, Origin, ParamSchedule, SchemeError};
use crate::antidiv::grad_inv_laplacian;
use crate::field::{GridSpec, ScalarField, TimeField, VectorField};
use crate::profiles::{chi0, chi0_prime, DecayProfiles};
use std::f64::consts::PI;

/// Oscillation of the starting triple used by the closed-form construction, `20a`.
pub fn default_lambda0(s: &ParamSchedule) -> f64 {
    20.0 * s.a
}

fn check_lambda(grid: &GridSpec, lambda: usize) -> Result<(), SchemeError> {
    if lambda == 0 || 2 * lambda >= grid.n {
        return Err(SchemeError::GridUnderResolved(format!(
            "oscillation lambda = {lambda} needs n > 2 lambda, got n = {}",
            grid.n
        )));
    }
    Ok(())
}

/// `ρ_0 = χ_0 + (1 + sin(2πλx_1)/4)(1 − χ_0)`, `H_0 = 0`,
/// `R_0 = −χ_0′ cos(2πλx_1)/(8πλ) e_1`.
pub fn initial_triple_tce(grid: GridSpec, lambda: usize) -> Result<IterationState, SchemeError> {
    check_lambda(&grid, lambda)?;
    let l = lambda as f64;
    let s = ScalarField::from_fn(grid, |x| (2.0 * PI * l * x[0]).sin());
    let c = ScalarField::from_fn(grid, |x| (2.0 * PI * l * x[0]).cos());
    let rho = TimeField::from_fn(grid, |_, t| {
        let k = chi0(t);
        s.map(|v| k + (1.0 + v / 4.0) * (1.0 - k))
    })?;
    let drho = TimeField::from_fn(grid, |_, t| {
        let kp = chi0_prime(t);
        s.map(|v| -kp * v / 4.0)
    })?;
    let r = TimeField::from_fn(grid, |_, t| {
        let kp = chi0_prime(t);
        let mut comps = vec![ScalarField::zeros(grid); grid.d];
        comps[0] = c.map(|v| -kp * v / (8.0 * PI * l));
        VectorField::from_components(comps).expect("d components")
    })?;
    Ok(IterationState {
        q: 0,
        grid,
        rho,
        drho,
        ham: ScalarField::zeros(grid),
        r,
        origin: Origin::Tce { lambda },
        diagnostics: Vec::new(),
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `ρ_0 = χ_0 + ψ̄_0(λx_1)(1 − χ_0)`, `H_0 = H̄_0(λx_1)`, `R_0 = χ_0′ ∇Δ^{−1}(ψ̄_0(λx_1) − 1) e_1`.
///
/// The profiles are normalized on the lattice of values that `λx_1 mod 1` takes on the grid,
/// so `∫ψ̄_0(λx_1) = ∫H̄_0(λx_1) = 1` hold exactly for the sampled fields. The divergence of
/// `R_0` misses the pure Nyquist content of `ψ̄_0(λx_1)`; that part of the residual is
/// reported separately (see `ResidualReport::abs_projected`).
pub fn initial_triple_hamil(grid: GridSpec, lambda: usize, delta: f64) -> Result<IterationState, SchemeError> {
    check_lambda(&grid, lambda)?;
    if !(delta > 0.0 && delta <= 1.0 / 16.0) {
        return Err(SchemeError::BadParameter(format!("Delta = {delta} must lie in (0, 1/16]")));
    }
    let count = grid.n / gcd(lambda, grid.n);
    let prof = DecayProfiles::new(delta, count)?;
    let l = lambda as f64;
    let y = |x: &[f64]| (l * x[0]).rem_euclid(1.0);
    let psi = ScalarField::from_fn(grid, |x| prof.psi_bar(y(x)));
    let ham = ScalarField::from_fn(grid, |x| prof.h_bar(y(x)));
    let a = grad_inv_laplacian(&psi.map(|v| v - 1.0))?;
    let rho = TimeField::from_fn(grid, |_, t| {
        let k = chi0(t);
        psi.map(|v| k + v * (1.0 - k))
    })?;
    let drho = TimeField::from_fn(grid, |_, t| {
        let kp = chi0_prime(t);
        psi.map(|v| kp * (1.0 - v))
    })?;
    let r = TimeField::from_fn(grid, |_, t| {
        let mut v = a.clone();
        v.scale(chi0_prime(t));
        v
    })?;
    Ok(IterationState {
        q: 0,
        grid,
        rho,
        drho,
        ham,
        r,
        origin: Origin::Hamil { lambda, profiles: prof },
        diagnostics: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::l1_vec;

    #[test]
    fn tce_closes_and_scales() {
        let g = GridSpec::new(2, 64, 9).unwrap();
        let s = initial_triple_tce(g, 4).unwrap();
        let res = s.residual();
        assert!(res.relative() < 1e-8, "{res:?}");
        let s8 = initial_triple_tce(g, 8).unwrap();
        let norm = |st: &IterationState| (0..g.n_t).map(|j| l1_vec(st.r.slice(j))).fold(0.0, f64::max);
        let ratio = norm(&s) / norm(&s8);
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
        // t ≤ 1/3: ρ ≡ 1 and R ≡ 0.
        for j in 0..g.n_t {
            if g.time(j) <= 1.0 / 3.0 {
                assert!(s.rho.slice(j).values().iter().all(|&v| v == 1.0));
                assert_eq!(s.r.slice(j).max_abs(), 0.0);
            }
        }
        assert!(matches!(initial_triple_tce(g, 32), Err(SchemeError::GridUnderResolved(_))));
    }

    #[test]
    fn hamil_profiles_and_closure() {
        let g = GridSpec::new(2, 256, 5).unwrap();
        let s = initial_triple_hamil(g, 40, 1.0 / 32.0).unwrap();
        let res = s.residual();
        assert!(res.relative_projected() < 1e-8, "{res:?}");
        let h = &s.ham;
        assert!((h.mean() - 1.0).abs() < 1e-12);
        let at0 = h.integral_product(s.rho.slice(0));
        let at1 = h.integral_product(s.rho.slice(g.n_t - 1));
        assert!((at0 - 1.0).abs() < 1e-12);
        assert!((at1 - 1.0 / 32.0).abs() < 1e-12);
        // Support of H_0 sits where ψ̄_0(λx_1) = Δ.
        let rho1 = s.rho.slice(g.n_t - 1);
        for (hv, rv) in h.values().iter().zip(rho1.values()) {
            if *hv > 0.0 {
                assert_eq!(*rv, 1.0 / 32.0);
            }
        }
        assert!(initial_triple_hamil(g, 40, 0.2).is_err());
    }
}
