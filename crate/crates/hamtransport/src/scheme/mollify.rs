//! Space-time mollification of a state.
//!
//! Time convolution uses the sampled kernel weights with constant extension past the ends
//! of the time interval; space convolution is a Fourier multiplier by the sampled kernel.
//! Both are linear and commute with spatial derivatives, so the mollified triple satisfies
//! the mollified residual identity exactly.

use super::{IterationState, SchemeError};
use crate::field::{apply_j, gradient, GridSpec, ScalarField, Spectrum, TimeField, VectorField};
use crate::profiles::{mollifier_kernel, MollifierKernel};

/// Kernel at scale `ℓ` together with its Fourier multiplier.
#[derive(Clone, Debug)]
pub struct Mollifier {
    pub kernel: MollifierKernel,
    khat: Vec<f64>,
}

impl Mollifier {
    pub fn new(ell: f64, grid: &GridSpec) -> Result<Self, SchemeError> {
        let kernel = mollifier_kernel(ell, grid)?;
        // The sampled kernel is even, so its coefficients are real.
        let khat = Spectrum::of(&kernel.space).coeffs().iter().map(|c| c.re).collect();
        Ok(Self { kernel, khat })
    }

    pub fn ell(&self) -> f64 {
        self.kernel.ell
    }

    /// Spatial convolution `K_ℓ * f`.
    pub fn space(&self, f: &ScalarField) -> ScalarField {
        let mut s = Spectrum::of(f);
        for (c, k) in s.coeffs_mut().iter_mut().zip(&self.khat) {
            *c *= *k;
        }
        s.to_field()
    }

    pub fn space_vec(&self, v: &VectorField) -> VectorField {
        VectorField::from_components(v.components().iter().map(|c| self.space(c)).collect()).expect("same grid")
    }

    fn time_combine<F: Clone>(weights: &[f64], slices: &[F], j: usize, zero: F, axpy: impl Fn(&mut F, f64, &F)) -> F {
        let m = (weights.len() - 1) / 2;
        let last = slices.len() - 1;
        let mut out = zero;
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let idx = (j as i64 + k as i64 - m as i64).clamp(0, last as i64) as usize;
            axpy(&mut out, w, &slices[idx]);
        }
        out
    }

    /// Time convolution of a scalar family at slice `j`.
    pub fn time_scalar(&self, f: &TimeField<ScalarField>, j: usize, derivative: bool) -> ScalarField {
        let w = if derivative { &self.kernel.time_prime } else { &self.kernel.time };
        Self::time_combine(w, f.slices(), j, ScalarField::zeros(*f.grid()), |o, a, x| o.axpy(a, x))
    }

    pub fn time_vector(&self, f: &TimeField<VectorField>, j: usize, derivative: bool) -> VectorField {
        let w = if derivative { &self.kernel.time_prime } else { &self.kernel.time };
        Self::time_combine(w, f.slices(), j, VectorField::zeros(*f.grid()), |o, a, x| o.axpy(a, x))
    }
}

/// Mollified quantities at one time slice.
#[derive(Clone, Debug)]
pub struct MollifiedSlice {
    pub rho_ell: ScalarField,
    pub drho_ell: ScalarField,
    pub r_ell: VectorField,
    /// `∂_t R_ℓ`, from the derivative of the time kernel.
    pub dr_ell: VectorField,
    /// `(ρ_q u_q)_ℓ − ρ_ℓ u_ℓ`.
    pub comm: VectorField,
}

/// Autonomous parts of a mollified state.
#[derive(Clone, Debug)]
pub struct MollifiedStatic {
    pub ham_ell: ScalarField,
    pub u: VectorField,
    pub u_ell: VectorField,
}

impl Mollifier {
    pub fn statics(&self, state: &IterationState) -> MollifiedStatic {
        let ham_ell = self.space(&state.ham);
        let u_ell = apply_j(&gradient(&ham_ell)).expect("even dimension");
        MollifiedStatic { ham_ell, u: state.velocity(), u_ell }
    }

    pub fn slice(&self, state: &IterationState, st: &MollifiedStatic, j: usize) -> MollifiedSlice {
        let rho_bar = self.time_scalar(&state.rho, j, false);
        let rho_ell = self.space(&rho_bar);
        let drho_ell = self.space(&self.time_scalar(&state.drho, j, false));
        let r_ell = self.space_vec(&self.time_vector(&state.r, j, false));
        let dr_ell = self.space_vec(&self.time_vector(&state.r, j, true));
        let zero_u = st.u.max_abs() == 0.0 && st.u_ell.max_abs() == 0.0;
        let comm = if zero_u {
            VectorField::zeros(state.grid)
        } else {
            let mut c = self.space_vec(&st.u.times_scalar(&rho_bar));
            c.axpy(-1.0, &st.u_ell.times_scalar(&rho_ell));
            c
        };
        MollifiedSlice { rho_ell, drho_ell, r_ell, dr_ell, comm }
    }
}

/// Fully materialized mollification (every slice), for inspection on small grids.
#[derive(Clone, Debug)]
pub struct Mollified {
    pub ham_ell: ScalarField,
    pub u_ell: VectorField,
    pub rho_ell: TimeField<ScalarField>,
    pub drho_ell: TimeField<ScalarField>,
    pub r_ell: TimeField<VectorField>,
    pub dr_ell: TimeField<VectorField>,
    pub comm: TimeField<VectorField>,
}

pub fn mollify_state(state: &IterationState, ell: f64) -> Result<Mollified, SchemeError> {
    let m = Mollifier::new(ell, &state.grid)?;
    let st = m.statics(state);
    let g = state.grid;
    let slices: Vec<MollifiedSlice> = (0..g.n_t).map(|j| m.slice(state, &st, j)).collect();
    let take_s = |f: fn(&MollifiedSlice) -> &ScalarField| TimeField::new(g, slices.iter().map(|s| f(s).clone()).collect());
    let take_v = |f: fn(&MollifiedSlice) -> &VectorField| TimeField::new(g, slices.iter().map(|s| f(s).clone()).collect());
    Ok(Mollified {
        ham_ell: st.ham_ell,
        u_ell: st.u_ell,
        rho_ell: take_s(|s| &s.rho_ell)?,
        drho_ell: take_s(|s| &s.drho_ell)?,
        r_ell: take_v(|s| &s.r_ell)?,
        dr_ell: take_v(|s| &s.dr_ell)?,
        comm: take_v(|s| &s.comm)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{initial_triple_tce, l1, l1_vec, Origin};
    use crate::util::loglog_slope;
    use std::f64::consts::PI;

    fn constant_state(g: GridSpec) -> IterationState {
        IterationState {
            q: 0,
            grid: g,
            rho: TimeField::from_fn(g, |_, _| ScalarField::constant(g, 1.0)).unwrap(),
            drho: TimeField::from_fn(g, |_, _| ScalarField::zeros(g)).unwrap(),
            ham: ScalarField::zeros(g),
            r: TimeField::from_fn(g, |_, _| VectorField::zeros(g)).unwrap(),
            origin: Origin::Tce { lambda: 1 },
            diagnostics: vec![],
        }
    }

    #[test]
    fn constants_are_fixed() {
        let g = GridSpec::new(2, 16, 9).unwrap();
        let m = mollify_state(&constant_state(g), 0.2).unwrap();
        for j in 0..g.n_t {
            assert!(m.rho_ell.slice(j).values().iter().all(|v| (v - 1.0).abs() < 1e-14));
            assert_eq!(m.comm.slice(j).max_abs(), 0.0);
            assert!(m.r_ell.slice(j).max_abs() < 1e-15);
        }
        assert!(matches!(mollify_state(&constant_state(g), 0.05), Err(SchemeError::Profile(_))));
    }

    #[test]
    fn rho_ell_close_to_rho() {
        let g = GridSpec::new(2, 64, 33).unwrap();
        let s = initial_triple_tce(g, 2).unwrap();
        let ell = 0.05;
        let m = mollify_state(&s, ell).unwrap();
        // ‖ρ_q‖_{C¹} ≥ sup|∇ρ| + sup|∂_tρ|.
        let c1 = 1.25 + 2.0 * PI * 2.0 / 4.0 + 3.0 * 2.0 / 4.0;
        for j in 0..g.n_t {
            let mut d = m.rho_ell.slice(j).clone();
            d.axpy(-1.0, s.rho.slice(j));
            assert!(l1(&d) <= 2.0 * ell * c1, "slice {j}");
        }
    }

    #[test]
    fn commutator_is_quadratic_in_ell() {
        let g = GridSpec::with_t_end(2, 128, 3, 0.01).unwrap();
        let mut s = constant_state(g);
        s.ham = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos() / (2.0 * PI));
        let rho = ScalarField::from_fn(g, |x| 1.0 + 0.5 * (2.0 * PI * (x[0] + 2.0 * x[1])).cos());
        s.rho = TimeField::from_fn(g, |_, _| rho.clone()).unwrap();
        // A single repeated slice makes the time kernel act trivially.
        let ells = [0.1, 0.05, 0.025];
        let norms: Vec<f64> = ells.iter().map(|&e| l1_vec(mollify_state(&s, e).unwrap().comm.slice(1))).collect();
        let slope = loglog_slope(&ells, &norms);
        assert!((slope - 2.0).abs() < 0.3, "slope {slope}, norms {norms:?}");
        for w in norms.windows(2) {
            let r = w[0] / w[1];
            assert!(r > 2.0 && r < 8.0, "ratio {r}");
        }
    }
}
