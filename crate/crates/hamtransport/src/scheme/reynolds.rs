//! Reynolds-stress assembly and the full stage transition.
//!
//! With `θ = θ^{(p)} + θ^{(c)}`, `ρ_{q+1} = ρ_ℓ + θ`, `H_{q+1} = H_ℓ + h`, the new stress is
//!
//! `−R_{q+1} = R^{quadr} + R^{defect} + (R̃_ℓ − R_ℓ) + R^{time} + θ^{(p)}u_ℓ
//!            + (ρ_ℓ − ⟨ρ_ℓ⟩)w + θ^{(c)}_N(u_ℓ + w) − [(ρu)_ℓ − ρ_ℓu_ℓ]`
//!
//! where `θ^{(c)}_N` is the checkerboard (non-mean) part of the corrector. `R^{quadr}` is the
//! improved anti-divergence of `Σ_ξ ∇C_ξ·(Θ_ξX_ξ − ⟨Θ_ξX_ξ⟩)(λx)`, and `R^{defect}` is
//! `∇Δ^{−1}` of whatever remains of `div(θ^{(p)}w − R̃_ℓ − R^{quadr})`: the cross-direction
//! products and the discretization error of the block identities. Every term is an explicit
//! field, so the stage residual closes to roundoff.

use super::mollify::{MollifiedSlice, MollifiedStatic, Mollifier};
use super::perturb::{SliceShells, StagePerturbation};
use super::{
    constant_window, l1, l1_vec, slice_residual, IterationState, ParamSchedule, ResidualReport, SchemeError,
    StageDiagnostics,
};
use crate::field::{apply_j, divergence, grad_inv_laplacian_with, gradient, sobolev_norm, Calculus, ScalarField, Spectrum, TimeField, VectorField};
use crate::geometry::DirectionSet;
use num_complex::Complex64;

/// The individual contributions to `−R_{q+1}` at one time slice.
#[derive(Clone, Debug)]
pub struct ReynoldsTerms {
    pub quadr: VectorField,
    pub defect: VectorField,
    /// `R̃_ℓ − R_ℓ`.
    pub shell: VectorField,
    pub time: VectorField,
    /// `θ^{(p)}u_ℓ + (ρ_ℓ − ⟨ρ_ℓ⟩)w + θ^{(c)}_N(u_ℓ + w)`.
    pub flux: VectorField,
    /// `(ρu)_ℓ − ρ_ℓu_ℓ`.
    pub comm: VectorField,
}

impl ReynoldsTerms {
    /// `R_{q+1}`.
    pub fn stress(&self) -> VectorField {
        let mut r = self.quadr.clone();
        r.axpy(1.0, &self.defect);
        r.axpy(1.0, &self.shell);
        r.axpy(1.0, &self.time);
        r.axpy(1.0, &self.flux);
        r.axpy(-1.0, &self.comm);
        r.scale(-1.0);
        r
    }
}

fn subtract_means(v: &mut VectorField) {
    for c in 0..v.grid().d {
        let m = v.comp(c).mean();
        v.comp_mut(c).add_constant(-m);
    }
}

/// `∇Δ^{−1}` of a field whose kernel content vanishes up to roundoff, with mean-free output.
fn antidiv(f: &ScalarField) -> VectorField {
    let mut v = grad_inv_laplacian_with(f, Calculus::Spectral);
    subtract_means(&mut v);
    v
}

fn quadratic(stage: &StagePerturbation, sh: &SliceShells) -> VectorField {
    let g = stage.grid;
    let d = g.d;
    let len = g.len();
    let tab: Vec<f64> = (0..g.n).map(|j| Calculus::Spectral.symbol(g.wavenumber(j), g.n)).collect();
    let mut quad = vec![vec![0.0; len]; d];
    let mut s = vec![0.0; len];
    for (i, c) in sh.c.iter().enumerate() {
        if c.max_abs() == 0.0 {
            continue;
        }
        let spec = Spectrum::of(c);
        let v = &stage.v_tile[i];
        for j in 0..d {
            let f = spec.multiply(|k| Complex64::new(0.0, tab[k[j]])).to_field();
            for (cc, qc) in quad.iter_mut().enumerate() {
                let vv = v[j].comp(cc).values();
                for (k, (o, fv)) in qc.iter_mut().zip(f.values()).enumerate() {
                    *o += fv * vv[stage.tile_of(k)];
                }
            }
            for l in j..d {
                let hjl = spec.multiply(|k| Complex64::new(-tab[k[j]] * tab[k[l]], 0.0)).to_field();
                let a = v[j].comp(l).values();
                let b = v[l].comp(j).values();
                for (k, (o, hv)) in s.iter_mut().zip(hjl.values()).enumerate() {
                    let t = stage.tile_of(k);
                    *o += hv * if l == j { a[t] } else { a[t] + b[t] };
                }
            }
        }
    }
    let mut sf = ScalarField::from_vec(g, s).expect("grid-sized");
    let m = sf.mean();
    sf.add_constant(-m);
    let inner = antidiv(&sf);
    let mut out = VectorField::from_components(quad.into_iter().map(|q| ScalarField::from_vec(g, q).expect("grid-sized")).collect())
        .expect("d components");
    out.axpy(-1.0, &inner);
    subtract_means(&mut out);
    out
}

/// All stress contributions at one time slice.
pub fn assemble_reynolds(stage: &StagePerturbation, ms: &MollifiedSlice, u_ell: &VectorField, sh: &SliceShells) -> ReynoldsTerms {
    let g = stage.grid;
    let quadr = quadratic(stage, sh);
    // R^{defect} = ∇Δ^{−1} div(θ^{(p)}w − R̃_ℓ − R^{quadr}).
    let mut resid = stage.w.times_scalar(&sh.theta_p);
    resid.axpy(-1.0, &sh.r_tilde);
    resid.axpy(-1.0, &quadr);
    let defect = antidiv(&divergence(&resid));
    let mut shell = sh.r_tilde.clone();
    shell.axpy(-1.0, &ms.r_ell);
    let mut dtheta = sh.dtheta_p.clone();
    dtheta.axpy(1.0, &sh.dtheta_c.to_field(g));
    let time = antidiv(&dtheta);
    let mut flux = u_ell.times_scalar(&sh.theta_p);
    let rho_mean = ms.rho_ell.mean();
    flux.axpy(1.0, &stage.w.times_scalar(&ms.rho_ell.map(|v| v - rho_mean)));
    let mut checker = sh.theta_c.clone();
    checker.coeffs[0] = 0.0;
    if checker.max_abs() > 0.0 {
        let mut uw = u_ell.clone();
        uw.axpy(1.0, &stage.w);
        flux.axpy(1.0, &uw.times_scalar(&checker.to_field(g)));
    }
    ReynoldsTerms { quadr, defect, shell, time, flux, comm: ms.comm.clone() }
}

/// One stage of the iteration `q → q+1`.
///
/// Work is streamed one time slice at a time: mollify, evaluate shells, assemble the
/// stress, and record diagnostics, so only the input and output states are held in full.
pub fn iterate(state: &IterationState, schedule: &ParamSchedule, ds: &DirectionSet) -> Result<IterationState, SchemeError> {
    let q = state.q;
    let grid = state.grid;
    if ds.d != grid.d {
        return Err(SchemeError::GridMismatch);
    }
    let ell = schedule.ell(q);
    let moll = Mollifier::new(ell, &grid)?;
    let stage = StagePerturbation::new(grid, schedule, ds, q)?;
    let statics: MollifiedStatic = moll.statics(state);
    let mut ham = statics.ham_ell.clone();
    ham.axpy(1.0, &stage.h);
    let u1 = apply_j(&gradient(&ham)).expect("even dimension");
    let mut u_sum = statics.u_ell.clone();
    u_sum.axpy(1.0, &stage.w);
    let mut du = u1.clone();
    du.axpy(-1.0, &u_sum);
    let u_scale = u1.max_abs();

    let window = constant_window(state);
    let mut diag = StageDiagnostics {
        stage: q + 1,
        lambda: stage.lambda as f64,
        mu: stage.mu,
        ell,
        kappa: stage.kappa,
        delta_next: schedule.delta(q + 1),
        u_identity: if u_scale > 0.0 { du.max_abs() / u_scale } else { du.max_abs() },
        inf_drho: f64::INFINITY,
        theta_p_min: f64::INFINITY,
        window_t0: window.map_or(f64::NAN, |j| grid.time(j)),
        cutoff_window: f64::NAN,
        ..Default::default()
    };
    let mut dh = ham.clone();
    dh.axpy(-1.0, &state.ham);
    diag.w2r_dh = sobolev_norm(&dh, 2, schedule.r)? + sobolev_norm(&dh, 1, schedule.p_prime)?;
    diag.linf_dh = dh.max_abs();

    let (mut rho1, mut drho1, mut r1) = (Vec::new(), Vec::new(), Vec::new());
    let mut residual = ResidualReport::default();
    let (mut theta_l1, mut corr_max) = (0.0f64, 0.0f64);
    let mut rmax_ell = 0.0f64;
    let mut shells: Option<(usize, usize)> = None;
    let mut window_dev: Option<f64> = None;
    for j in 0..grid.n_t {
        let ms = moll.slice(state, &statics, j);
        let r_ell_mag = ms.r_ell.magnitude();
        rmax_ell = rmax_ell.max(r_ell_mag.max_abs());
        diag.l1_r_ell = diag.l1_r_ell.max(l1(&r_ell_mag));
        let sh = stage.shells(&ms.r_ell, Some(&ms.dr_ell));
        if let Some((a, b)) = sh.shells {
            shells = Some(shells.map_or((a, b), |(x, y)| (x.min(a), y.max(b))));
        }
        let terms = assemble_reynolds(&stage, &ms, &statics.u_ell, &sh);
        let r = terms.stress();
        let theta_c = sh.theta_c.to_field(grid);
        let mut theta = sh.theta_p.clone();
        theta.axpy(1.0, &theta_c);
        let mut rho = ms.rho_ell.clone();
        rho.axpy(1.0, &theta);
        let mut drho = ms.drho_ell.clone();
        drho.axpy(1.0, &sh.dtheta_p);
        drho.axpy(1.0, &sh.dtheta_c.to_field(grid));

        let old_rho = state.rho.slice(j);
        let delta_rho = rho.zip_map(old_rho, |a, b| a - b);
        diag.l1_drho = diag.l1_drho.max(l1(&delta_rho));
        diag.inf_drho = diag.inf_drho.min(delta_rho.min());
        let mut dflux = u1.times_scalar(&rho);
        dflux.axpy(-1.0, &statics.u.times_scalar(old_rho));
        diag.l1_dflux = diag.l1_dflux.max(l1_vec(&dflux));
        diag.mass_drift = diag.mass_drift.max((rho.mean() - old_rho.mean()).abs());
        diag.theta_p_min = diag.theta_p_min.min(sh.theta_p.min());
        diag.mean_zero = diag.mean_zero.max(theta.mean().abs());
        theta_l1 = theta_l1.max(l1(&sh.theta_p));
        corr_max = corr_max.max(theta_c.max_abs());
        diag.l1_r = diag.l1_r.max(l1_vec(&r));
        diag.l1_r_prev = diag.l1_r_prev.max(l1_vec(state.r.slice(j)));
        diag.l1_r_quadr = diag.l1_r_quadr.max(l1_vec(&terms.quadr));
        diag.l1_r_defect = diag.l1_r_defect.max(l1_vec(&terms.defect));
        diag.l1_r_shell = diag.l1_r_shell.max(l1_vec(&terms.shell));
        diag.l1_r_time = diag.l1_r_time.max(l1_vec(&terms.time));
        diag.l1_r_flux = diag.l1_r_flux.max(l1_vec(&terms.flux));
        diag.l1_r_comm = diag.l1_r_comm.max(l1_vec(&terms.comm));
        if let Some(j0) = window {
            if grid.time(j) <= grid.time(j0) - ell + 1e-12 {
                let dev = rho.values().iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs())) + r.max_abs();
                window_dev = Some(window_dev.map_or(dev, |w: f64| w.max(dev)));
            }
        }
        let res = slice_residual(&rho, &drho, &u1, &r);
        residual = ResidualReport {
            abs: residual.abs.max(res.abs),
            abs_projected: residual.abs_projected.max(res.abs_projected),
            scale: residual.scale.max(res.scale),
        };
        rho1.push(rho);
        drho1.push(drho);
        r1.push(r);
    }
    diag.residual = residual.relative();
    diag.inf_drho_bound = -theta_l1 - corr_max;
    diag.cutoff_window = window_dev.unwrap_or(f64::NAN);
    if let Some((a, b)) = shells {
        diag.shell_min = a;
        diag.shell_max = b;
    }
    diag.shell_bound = (stage.kappa * rmax_ell).ceil() as usize + 1;
    let mut diagnostics = state.diagnostics.clone();
    diagnostics.push(diag);
    Ok(IterationState {
        q: q + 1,
        grid,
        rho: TimeField::new(grid, rho1)?,
        drho: TimeField::new(grid, drho1)?,
        ham,
        r: TimeField::new(grid, r1)?,
        origin: state.origin.clone(),
        diagnostics,
    })
}
