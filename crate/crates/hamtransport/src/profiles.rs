//! Compactly supported profiles: the concentration bump `φ`, the Hamiltonian profile `ψ`,
//! the integer-shift partition of unity `χ`, the time cutoff `χ₀`, mollifier kernels and
//! the one-dimensional profiles of the Hamiltonian-decay starting triple.

use crate::field::{torus_delta, GridSpec, ScalarField};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("rho = {0} must lie in (0, 1/4)")]
    BadRho(f64),
    #[error("mollification scale {ell} does not exceed the grid step {step}")]
    EllTooSmallForGrid { ell: f64, step: f64 },
    #[error("profile constraint violated: {0}")]
    ProfileConstraintViolated(String),
}

/// `exp(−1/(1−t²))` on `(−1, 1)`, zero outside.
pub fn bump(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// Derivative of [`bump`].
pub fn bump_prime(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        -2.0 * t / (s * s) * (-1.0 / s).exp()
    }
}

fn g(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

fn g_prime(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp() / (s * s)
    }
}

/// Smooth monotone transition from 0 (for `s ≤ 0`) to 1 (for `s ≥ 1`).
pub fn transition(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let (a, b) = (g(s), g(1.0 - s));
        a / (a + b)
    }
}

pub fn transition_prime(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        let (a, b) = (g(s), g(1.0 - s));
        (g_prime(s) * b + a * g_prime(1.0 - s)) / ((a + b) * (a + b))
    }
}

fn g_second(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp() * (1.0 / s.powi(4) - 2.0 / s.powi(3))
    }
}

pub fn transition_second(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let (a, b) = (g(s), g(1.0 - s));
    let (a1, b1) = (g_prime(s), -g_prime(1.0 - s));
    let (a2, b2) = (g_second(s), g_second(1.0 - s));
    let den = a + b;
    ((a2 * b - a * b2) * den - 2.0 * (a1 * b - a * b1) * (a1 + b1)) / den.powi(3)
}

/// Non-increasing step: 1 on `(−∞, −1/4]`, 0 on `[1/4, ∞)`.
pub fn step(tau: f64) -> f64 {
    1.0 - transition(2.0 * tau + 0.5)
}

pub fn step_prime(tau: f64) -> f64 {
    -2.0 * transition_prime(2.0 * tau + 0.5)
}

/// `χ(τ) = S(τ − 1/2) − S(τ + 1/2)`, supported in `(−3/4, 3/4)`; integer shifts sum to 1.
pub fn chi(tau: f64) -> f64 {
    step(tau - 0.5) - step(tau + 0.5)
}

pub fn chi_prime(tau: f64) -> f64 {
    step_prime(tau - 0.5) - step_prime(tau + 0.5)
}

/// Time cutoff: 1 on `[0, 1/3]`, 0 on `[2/3, 1]`.
pub fn chi0(t: f64) -> f64 {
    1.0 - transition(3.0 * t - 1.0)
}

pub fn chi0_prime(t: f64) -> f64 {
    -3.0 * transition_prime(3.0 * t - 1.0)
}

fn check_rho(rho: f64) -> Result<(), ProfileError> {
    if rho > 0.0 && rho < 0.25 {
        Ok(())
    } else {
        Err(ProfileError::BadRho(rho))
    }
}

/// Surface area of the unit sphere in `ℝ^m`.
fn sphere_area(m: usize) -> f64 {
    use std::f64::consts::PI;
    let mut a = if m % 2 == 1 { 2.0 } else { 2.0 * PI };
    let mut k = if m % 2 == 1 { 1 } else { 2 };
    while k < m {
        a *= 2.0 * PI / k as f64;
        k += 2;
    }
    a
}

/// `∫_{ℝ^m} bump(|x|) dx`, by the radial integral `ω_m ∫_0^1 r^{m−1} bump(r) dr`.
///
/// The radial integrand extended evenly or oddly to `[−1, 1]` vanishes to infinite order at
/// the ends, so the trapezoidal rule on the symmetric interval converges spectrally.
pub fn radial_bump_mass(m: usize) -> f64 {
    let n = 20_000;
    let h = 2.0 / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let r = -1.0 + i as f64 * h;
        s += r.abs().powi(m as i32 - 1) * bump(r);
    }
    0.5 * s * h * sphere_area(m)
}

/// `φ(x) = c · bump(|x|/ρ)` on `ℝ^m` with `∫φ = 1`.
///
/// The bump is the scale-invariant `exp(−1/(1 − |x|²/ρ²))`, so the profile keeps its
/// shape for every `ρ`.
#[derive(Clone, Copy, Debug)]
pub struct Phi {
    pub rho: f64,
    pub dim: usize,
    pub c: f64,
}

impl Phi {
    pub fn new(rho: f64, dim: usize) -> Result<Self, ProfileError> {
        check_rho(rho)?;
        let c = 1.0 / (radial_bump_mass(dim) * rho.powi(dim as i32));
        Ok(Self { rho, dim, c })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.c * bump((r2.sqrt() / self.rho).min(1.0))
    }

    /// Profile without the normalizing constant, as a function of `|x|²`.
    pub fn shape_sq(&self, r2: f64) -> f64 {
        let s = 1.0 - r2 / (self.rho * self.rho);
        if s <= 0.0 {
            0.0
        } else {
            (-1.0 / s).exp()
        }
    }
}

/// Radial cutoff used by `ψ`: 1 on `[0, 3ρ/2]`, 0 on `[2ρ, ∞)`.
pub fn eta(r: f64, rho: f64) -> f64 {
    1.0 - transition((r - 1.5 * rho) / (0.5 * rho))
}

pub fn eta_prime(r: f64, rho: f64) -> f64 {
    -transition_prime((r - 1.5 * rho) / (0.5 * rho)) / (0.5 * rho)
}

pub fn eta_second(r: f64, rho: f64) -> f64 {
    -transition_second((r - 1.5 * rho) / (0.5 * rho)) / (0.25 * rho * rho)
}

/// Gradient of [`psi`].
pub fn psi_gradient(x: &[f64], rho: f64) -> Vec<f64> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut out = vec![0.0; x.len()];
    if r >= 2.0 * rho {
        return out;
    }
    out[0] = eta(r, rho);
    if r > 0.0 {
        let e1 = eta_prime(r, rho);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += x[0] * e1 * xi / r;
        }
    }
    out
}

/// Hessian of [`psi`], row-major.
pub fn psi_hessian(x: &[f64], rho: f64) -> Vec<f64> {
    let m = x.len();
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut out = vec![0.0; m * m];
    if r >= 2.0 * rho || r == 0.0 {
        return out;
    }
    let (e1, e2) = (eta_prime(r, rho), eta_second(r, rho));
    for i in 0..m {
        for j in 0..m {
            let mut v = x[0] * (e2 * x[i] * x[j] / (r * r) + e1 * ((i == j) as u8 as f64 / r - x[i] * x[j] / r.powi(3)));
            if i == 0 {
                v += e1 * x[j] / r;
            }
            if j == 0 {
                v += e1 * x[i] / r;
            }
            out[i * m + j] = v;
        }
    }
    out
}

/// `ψ(x) = x_1 η(|x|)`; equals `x_1` on `B_{3ρ/2}` and vanishes outside `B_{2ρ}`.
pub fn psi(x: &[f64], rho: f64) -> f64 {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r >= 2.0 * rho {
        0.0
    } else {
        x[0] * eta(r, rho)
    }
}

pub fn eval_phi(x: &[f64], rho: f64) -> Result<f64, ProfileError> {
    Ok(Phi::new(rho, x.len())?.eval(x))
}

pub fn eval_psi(x: &[f64], rho: f64) -> Result<f64, ProfileError> {
    check_rho(rho)?;
    Ok(psi(x, rho))
}

/// Space-time mollifier: a radial bump of radius `ℓ` in space, sampled on the grid and
/// normalized to unit discrete mass, and a bump of radius `ℓ` in time, sampled at the
/// offsets `m Δt` and normalized likewise.
#[derive(Clone, Debug)]
pub struct MollifierKernel {
    pub ell: f64,
    /// Periodized spatial kernel, unit sum times cell volume.
    pub space: ScalarField,
    /// Weights for the time offsets `−M..=M`.
    pub time: Vec<f64>,
    /// Derivative weights: `d/dt` of the time-smoothed signal at the sample points.
    pub time_prime: Vec<f64>,
}

impl MollifierKernel {
    /// Largest time offset in slices.
    pub fn reach(&self) -> usize {
        (self.time.len() - 1) / 2
    }
}

pub fn mollifier_kernel(ell: f64, grid: &GridSpec) -> Result<MollifierKernel, ProfileError> {
    let step = grid.spacing().max(grid.dt());
    if !(ell > step) {
        return Err(ProfileError::EllTooSmallForGrid { ell, step });
    }
    let mut space = ScalarField::from_fn(*grid, |x| {
        let r2: f64 = x.iter().map(|v| torus_delta(*v).powi(2)).sum();
        bump((r2.sqrt() / ell).min(1.0))
    });
    let mass = space.values().iter().sum::<f64>();
    space.scale(grid.len() as f64 / mass);
    let dt = grid.dt();
    let m = (ell / dt).ceil() as i64;
    let offsets: Vec<f64> = (-m..=m).map(|k| k as f64 * dt).collect();
    let raw: Vec<f64> = offsets.iter().map(|s| bump(s / ell)).collect();
    let z: f64 = raw.iter().sum();
    let time = raw.iter().map(|w| w / z).collect();
    // Derivative of t ↦ Σ_j bump((t − t_j)/ℓ) f_j at t = t_i, where the offset to t_{i+k}
    // is −kΔt; scaled so linear signals are differentiated exactly.
    let raw_prime: Vec<f64> = offsets.iter().map(|s| bump_prime(-s / ell)).collect();
    let moment: f64 = raw_prime.iter().zip(&offsets).map(|(w, s)| w * s).sum();
    let time_prime = raw_prime.iter().map(|w| w / moment).collect();
    Ok(MollifierKernel { ell, space, time, time_prime })
}

/// One-dimensional profiles of the Hamiltonian-decay starting triple, sampled on a lattice
/// of `count` points `j/count` of the unit interval.
///
/// `psi_bar = Δ + A·bump(4y − 3)` is `Δ` on `[0, 1/2]` and has unit mean; `h_bar =
/// B·bump(4y − 1)` is supported in `(0, 1/2)` with unit mean. `A` and `B` are fixed by the
/// lattice mean so the unit-mass constraints hold exactly on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayProfiles {
    pub delta: f64,
    pub count: usize,
    pub psi_amp: f64,
    pub h_amp: f64,
}

impl DecayProfiles {
    pub fn new(delta: f64, count: usize) -> Result<Self, ProfileError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(ProfileError::ProfileConstraintViolated(format!("Delta = {delta} must lie in (0, 1)")));
        }
        let lattice_mean = |f: &dyn Fn(f64) -> f64| (0..count).map(|j| f(j as f64 / count as f64)).sum::<f64>() / count as f64;
        let mp = lattice_mean(&|y| bump(4.0 * y - 3.0));
        let mh = lattice_mean(&|y| bump(4.0 * y - 1.0));
        if mp == 0.0 || mh == 0.0 {
            return Err(ProfileError::ProfileConstraintViolated(format!("lattice of {count} points misses the profile supports")));
        }
        let out = Self { delta, count, psi_amp: (1.0 - delta) / mp, h_amp: 1.0 / mh };
        let tol = 1e-12;
        for j in 0..count {
            let y = j as f64 / count as f64;
            let (p, h) = (out.psi_bar(y), out.h_bar(y));
            if p > 4.0 + tol || h > 4.0 + tol {
                return Err(ProfileError::ProfileConstraintViolated(format!(
                    "sup bound 4 exceeded: psi_bar = {p}, h_bar = {h}"
                )));
            }
        }
        Ok(out)
    }

    /// Profiles evaluated at `y mod 1`.
    pub fn psi_bar(&self, y: f64) -> f64 {
        let y = y.rem_euclid(1.0);
        self.delta + self.psi_amp * bump(4.0 * y - 3.0)
    }

    pub fn h_bar(&self, y: f64) -> f64 {
        let y = y.rem_euclid(1.0);
        self.h_amp * bump(4.0 * y - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chi_values_and_partition() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(0.8), 0.0);
        assert_eq!(chi(-0.75), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let tau: f64 = rng.gen_range(-2.0..2.0);
            let s: f64 = (-3..=3).map(|n| chi(tau - n as f64)).sum();
            worst = worst.max((s - 1.0).abs());
        }
        assert!(worst <= 1e-12, "{worst}");
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for &t in &[-0.6, -0.3, 0.1, 0.37, 0.55] {
            let fd = (chi(t + h) - chi(t - h)) / (2.0 * h);
            assert!((fd - chi_prime(t)).abs() < 1e-6, "chi' at {t}");
            let fd = (bump(t + h) - bump(t - h)) / (2.0 * h);
            assert!((fd - bump_prime(t)).abs() < 1e-6);
        }
        for &t in &[0.4, 0.5, 0.6] {
            let fd = (chi0(t + h) - chi0(t - h)) / (2.0 * h);
            assert!((fd - chi0_prime(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn psi_derivatives_match_finite_differences() {
        let rho = 0.125;
        let h = 1e-6;
        for x in [[0.15, 0.1, -0.05], [0.05, -0.2, 0.02], [-0.1, 0.12, 0.13]] {
            let gr = psi_gradient(&x, rho);
            let hs = psi_hessian(&x, rho);
            for k in 0..3 {
                let (mut a, mut b) = (x, x);
                a[k] += h;
                b[k] -= h;
                assert!(((psi(&a, rho) - psi(&b, rho)) / (2.0 * h) - gr[k]).abs() < 1e-6);
                let (ga, gb) = (psi_gradient(&a, rho), psi_gradient(&b, rho));
                for j in 0..3 {
                    let fd = (ga[j] - gb[j]) / (2.0 * h);
                    assert!((fd - hs[k * 3 + j]).abs() < 1e-4 * (1.0 + fd.abs()), "{x:?} {k} {j}");
                }
            }
        }
        for &s in &[0.2, 0.5, 0.8] {
            let fd = (transition_prime(s + h) - transition_prime(s - h)) / (2.0 * h);
            assert!((fd - transition_second(s)).abs() < 1e-5 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn time_cutoff_plateaus() {
        for i in 0..=100 {
            let t = i as f64 / 300.0;
            assert_eq!(chi0(t), 1.0);
            assert_eq!(chi0(2.0 / 3.0 + t), 0.0);
            assert_eq!(chi0_prime(t), 0.0);
        }
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn phi_support_and_symmetry() {
        let phi = Phi::new(0.125, 3).unwrap();
        assert_eq!(phi.eval(&[0.125, 0.0, 0.0]), 0.0);
        assert_eq!(phi.eval(&[0.1, 0.1, 0.0]), 0.0);
        assert!(phi.eval(&[0.0; 3]) > 0.0);
        assert_eq!(phi.eval(&[0.03, -0.02, 0.05]), phi.eval(&[-0.03, 0.02, -0.05]));
        assert!(matches!(Phi::new(0.3, 3), Err(ProfileError::BadRho(_))));
    }

    #[test]
    fn phi_one_dimensional_mass() {
        let phi = Phi::new(0.2, 1).unwrap();
        let n = 4096;
        let s: f64 = (0..n).map(|i| phi.eval(&[i as f64 / n as f64 - 0.5])).sum::<f64>() / n as f64;
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn psi_inside_and_outside() {
        let rho = 0.125;
        assert_eq!(eval_psi(&[rho / 2.0, 0.0, 0.0], rho).unwrap(), rho / 2.0);
        assert_eq!(psi(&[0.2, 0.15, 0.0], rho), 0.0);
        let h = 1e-5;
        let x = [0.02, -0.03, 0.01];
        for k in 0..3 {
            let mut a = x;
            let mut b = x;
            a[k] += h;
            b[k] -= h;
            let fd = (psi(&a, rho) - psi(&b, rho)) / (2.0 * h);
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert!((fd - want).abs() < 1e-8);
        }
    }

    #[test]
    fn mollifier_unit_mass_and_constants() {
        let g = GridSpec::with_t_end(2, 32, 16, 1.0).unwrap();
        let k = mollifier_kernel(0.125, &g).unwrap();
        assert!((k.space.mean() - 1.0).abs() < 1e-12);
        assert!((k.time.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(k.time_prime.iter().sum::<f64>().abs() < 1e-12);
        assert!(matches!(mollifier_kernel(0.05, &g), Err(ProfileError::EllTooSmallForGrid { .. })));
    }

    #[test]
    fn time_derivative_weights_differentiate_linear_signals() {
        let g = GridSpec::with_t_end(2, 16, 101, 1.0).unwrap();
        let k = mollifier_kernel(0.1, &g).unwrap();
        let m = k.reach() as i64;
        let d: f64 = (-m..=m).zip(&k.time_prime).map(|(o, w)| w * (o as f64 * g.dt())).sum();
        assert!((d - 1.0).abs() < 1e-12, "{d}");
    }

    #[test]
    fn decay_profiles_constraints() {
        let p = DecayProfiles::new(1.0 / 32.0, 32).unwrap();
        let n = 32;
        let mean_psi: f64 = (0..n).map(|j| p.psi_bar(j as f64 / n as f64)).sum::<f64>() / n as f64;
        let mean_h: f64 = (0..n).map(|j| p.h_bar(j as f64 / n as f64)).sum::<f64>() / n as f64;
        assert!((mean_psi - 1.0).abs() < 1e-14 && (mean_h - 1.0).abs() < 1e-14);
        for j in 0..=16 {
            assert_eq!(p.psi_bar(j as f64 / 32.0), 1.0 / 32.0);
        }
        for j in 16..32 {
            assert_eq!(p.h_bar(j as f64 / 32.0), 0.0);
        }
        assert!(DecayProfiles::new(0.5, 2).is_err());
    }

    proptest! {
        #[test]
        fn chi_is_nonnegative_and_bounded(tau in -3.0f64..3.0) {
            let c = chi(tau);
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert!(step_prime(tau) <= 0.0);
        }

        #[test]
        fn partition_of_unity(tau in -50.0f64..50.0) {
            let k = tau.floor() as i64;
            let s: f64 = (k - 2..=k + 2).map(|n| chi(tau - n as f64)).sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }
}
