//! The convex-integration iteration on the torus: parameter schedule, starting triples,
//! mollification, perturbation and Reynolds-stress assembly, and per-stage diagnostics.
//!
//! A state carries `(ρ_q, ∂_tρ_q, H_q, R_q)` on a space-time grid. The time derivative is
//! carried alongside `ρ_q` (it is known in closed form for the starting triples and by the
//! chain rule afterwards), so the residual `∂_tρ + div(ρ J∇H) + div R` is a pure spatial
//! identity that holds to roundoff at every stage.
//!
//! On a collocated grid every discrete divergence annihilates the constant mode and the
//! `2^d − 1` pure Nyquist checkerboards; these "kernel modes" are handled explicitly by the
//! corrector (see [`KernelModes`]).

mod initial;
mod mollify;
mod perturb;
mod reynolds;
mod schedule;

pub use initial::{default_lambda0, initial_triple_hamil, initial_triple_tce};
pub use mollify::{mollify_state, Mollified, MollifiedSlice, MollifiedStatic, Mollifier};
pub use perturb::{assemble_perturbation, PerturbationBundle, SliceShells, StagePerturbation, SHELL_FLOOR};
pub use reynolds::{assemble_reynolds, iterate, ReynoldsTerms};
pub use schedule::{exponent_hypothesis, gamma_of, make_schedule, Mode, Overrides, ParamSchedule};

use crate::antidiv::AntidivError;
use crate::blocks::BlockError;
use crate::field::{divergence, gradient, apply_j, FieldError, GridSpec, ScalarField, TimeField, VectorField};
use crate::geometry::GeometryError;
use crate::profiles::{DecayProfiles, ProfileError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("exponents violate 1/p + 1/r > 1 + 1/(d-1): p = {p}, r = {r}, d = {d}")]
    ExponentHypothesisViolated { p: f64, r: f64, d: usize },
    #[error("tame mode requires parameter `{0}`")]
    MissingTameParameter(&'static str),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("lambda_{q} = {lambda} is not an integer frequency")]
    NonIntegerLambda { q: usize, lambda: f64 },
    #[error("lambda = {lambda}, mu = {mu} cannot be periodized on n = {n}: {reason}")]
    AliasedLambda { lambda: f64, mu: f64, n: usize, reason: String },
    #[error("grid under-resolved: {0}")]
    GridUnderResolved(String),
    #[error("states live on incompatible grids")]
    GridMismatch,
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Antidiv(#[from] AntidivError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// How the stage-0 triple was built; later stages inherit it.
#[derive(Clone, Debug, PartialEq)]
pub enum Origin {
    /// Transport-equation counterexample triple with oscillation `lambda`.
    Tce { lambda: usize },
    /// Hamiltonian-decay triple with the two one-dimensional profiles.
    Hamil { lambda: usize, profiles: DecayProfiles },
}

/// Immutable snapshot of one stage.
#[derive(Clone, Debug)]
pub struct IterationState {
    pub q: usize,
    pub grid: GridSpec,
    pub rho: TimeField<ScalarField>,
    /// `∂_tρ_q`, carried exactly rather than finite-differenced.
    pub drho: TimeField<ScalarField>,
    /// Autonomous Hamiltonian `H_q`.
    pub ham: ScalarField,
    pub r: TimeField<VectorField>,
    pub origin: Origin,
    /// One entry per completed `iterate`.
    pub diagnostics: Vec<StageDiagnostics>,
}

impl IterationState {
    /// `u_q = J∇H_q`.
    pub fn velocity(&self) -> VectorField {
        apply_j(&gradient(&self.ham)).expect("even dimension")
    }

    /// Residual of the relaxed continuity equation, maximized over time slices.
    pub fn residual(&self) -> ResidualReport {
        let u = self.velocity();
        let mut rep = ResidualReport::default();
        for j in 0..self.grid.n_t {
            let s = slice_residual(self.rho.slice(j), self.drho.slice(j), &u, self.r.slice(j));
            rep.absorb(&s);
        }
        rep
    }
}

/// `L¹` sizes of the three terms of `∂_tρ + div(ρu) + div R` and of their sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ResidualReport {
    /// `max_t ‖residual‖_{L¹}`.
    pub abs: f64,
    /// `max_t` of the same residual with its kernel modes removed.
    pub abs_projected: f64,
    /// `max_t (‖∂_tρ‖ + ‖div(ρu)‖ + ‖div R‖)`, the natural scale of the cancellation.
    pub scale: f64,
}

impl ResidualReport {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.abs / self.scale
        } else {
            self.abs
        }
    }

    pub fn relative_projected(&self) -> f64 {
        if self.scale > 0.0 {
            self.abs_projected / self.scale
        } else {
            self.abs_projected
        }
    }

    fn absorb(&mut self, o: &ResidualReport) {
        self.abs = self.abs.max(o.abs);
        self.abs_projected = self.abs_projected.max(o.abs_projected);
        self.scale = self.scale.max(o.scale);
    }
}

pub(crate) fn l1(f: &ScalarField) -> f64 {
    f.values().iter().map(|v| v.abs()).sum::<f64>() / f.values().len() as f64
}

/// Pointwise-Euclidean `L¹` norm of a vector field.
pub(crate) fn l1_vec(v: &VectorField) -> f64 {
    l1(&v.magnitude())
}

pub(crate) fn slice_residual(rho: &ScalarField, drho: &ScalarField, u: &VectorField, r: &VectorField) -> ResidualReport {
    let flux = divergence(&u.times_scalar(rho));
    let dr = divergence(r);
    let mut res = drho.clone();
    res.axpy(1.0, &flux);
    res.axpy(1.0, &dr);
    let projected = KernelModes::of(&res).remove_from(&res);
    ResidualReport { abs: l1(&res), abs_projected: l1(&projected), scale: l1(drho) + l1(&flux) + l1(&dr) }
}

/// Coefficients of a field on the kernel modes of the discrete divergence: the mean and
/// the pure Nyquist checkerboards `χ_S(x) = Π_{a∈S} (−1)^{k_a}` for nonempty axis sets `S`.
/// Index `S` is a bit mask over axes; `S = 0` is the mean.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelModes {
    pub coeffs: Vec<f64>,
}

impl KernelModes {
    pub fn of(f: &ScalarField) -> Self {
        let g = *f.grid();
        let masks = 1usize << g.d;
        let mut acc = vec![0.0; masks];
        let mut parity_sums = vec![0.0; masks];
        for (idx, &v) in f.values().iter().enumerate() {
            parity_sums[parity(&g, idx)] += v;
        }
        for (s, a) in acc.iter_mut().enumerate() {
            *a = parity_sums.iter().enumerate().map(|(b, v)| if (b & s).count_ones() % 2 == 0 { *v } else { -*v }).sum::<f64>()
                / g.len() as f64;
        }
        Self { coeffs: acc }
    }

    pub fn zero(d: usize) -> Self {
        Self { coeffs: vec![0.0; 1 << d] }
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn negated(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    /// Value of `Σ_S c_S χ_S` at flat index `idx`.
    pub fn value_at(&self, g: &GridSpec, idx: usize) -> f64 {
        let b = parity(g, idx);
        self.coeffs.iter().enumerate().map(|(s, c)| if (b & s).count_ones() % 2 == 0 { *c } else { -*c }).sum()
    }

    /// Values per parity class, so evaluation is a table lookup.
    pub(crate) fn table(&self, d: usize) -> Vec<f64> {
        (0..1usize << d)
            .map(|b| self.coeffs.iter().enumerate().map(|(s, c)| if (b & s).count_ones() % 2 == 0 { *c } else { -*c }).sum())
            .collect()
    }

    pub fn to_field(&self, g: GridSpec) -> ScalarField {
        let t = self.table(g.d);
        ScalarField::from_vec(g, (0..g.len()).map(|i| t[parity(&g, i)]).collect()).expect("grid-sized")
    }

    /// `f − Σ_S c_S χ_S`.
    pub fn remove_from(&self, f: &ScalarField) -> ScalarField {
        let g = *f.grid();
        let t = self.table(g.d);
        let data = f.values().iter().enumerate().map(|(i, v)| v - t[parity(&g, i)]).collect();
        ScalarField::from_vec(g, data).expect("grid-sized")
    }
}

/// Bit `a` set iff the index along axis `a` is odd.
#[inline]
pub(crate) fn parity(g: &GridSpec, mut idx: usize) -> usize {
    let mut b = 0;
    for a in 0..g.d {
        b |= ((idx % g.n) & 1) << a;
        idx /= g.n;
    }
    b
}

/// Measured quantities of one stage transition `q → q+1`. Column order of the CSV
/// emitted by the io module follows [`StageDiagnostics::COLUMNS`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StageDiagnostics {
    /// Index of the new stage `q+1`.
    pub stage: usize,
    /// `max_t ‖R_{q+1}‖_{L¹}`.
    pub l1_r: f64,
    /// `max_t ‖R_q‖_{L¹}` of the input state, for the decrease ratio.
    pub l1_r_prev: f64,
    /// `max_t ‖R_ℓ‖_{L¹}`, the mollified input stress that the blocks are meant to cancel.
    pub l1_r_ell: f64,
    /// `max_t ‖ρ_{q+1} − ρ_q‖_{L¹}` (item (a)).
    pub l1_drho: f64,
    /// `‖H_{q+1}−H_q‖_{W^{2,r}} + ‖H_{q+1}−H_q‖_{W^{1,p′}}` (item (b)).
    pub w2r_dh: f64,
    /// `‖H_{q+1} − H_q‖_{L^∞}`.
    pub linf_dh: f64,
    /// `max_t ‖ρ_{q+1}u_{q+1} − ρ_q u_q‖_{L¹}` (item (c)).
    pub l1_dflux: f64,
    /// `min_{t,x} (ρ_{q+1} − ρ_q)` (item (d)).
    pub inf_drho: f64,
    /// Bound for item (d): `−max_t ‖θ^{(p)}‖_{L¹} − max|θ^{(c)}|`.
    pub inf_drho_bound: f64,
    /// Item (e): max of `|ρ_{q+1} − 1| + |R_{q+1}|` over slices `t ≤ t_0 − ℓ`; NaN if the
    /// input has no constant window or the shifted window is empty.
    pub cutoff_window: f64,
    /// Last time slice `t_0` of the input window, NaN if none.
    pub window_t0: f64,
    /// Relative residual of the new state (terms-scale normalization).
    pub residual: f64,
    /// `max_t |∫ρ_{q+1} − ∫ρ_q|`.
    pub mass_drift: f64,
    /// `min θ^{(p)}`.
    pub theta_p_min: f64,
    /// `max_t |∫(θ^{(p)} + θ^{(c)})|`.
    pub mean_zero: f64,
    /// `‖J∇H_{q+1} − (u_ℓ + w)‖_∞ / ‖J∇H_{q+1}‖_∞`.
    pub u_identity: f64,
    /// `max_t` `L¹` norms of the individual stress contributions.
    pub l1_r_quadr: f64,
    pub l1_r_defect: f64,
    pub l1_r_shell: f64,
    pub l1_r_time: f64,
    pub l1_r_flux: f64,
    pub l1_r_comm: f64,
    /// Active shell range `n_min..=n_max` (0, 0 if no shell is active).
    pub shell_min: usize,
    pub shell_max: usize,
    /// Upper bound `⌈κ max|R_ℓ|⌉ + 1` for the shell index.
    pub shell_bound: usize,
    /// Parameters of the transition.
    pub lambda: f64,
    pub mu: f64,
    pub ell: f64,
    pub kappa: f64,
    /// `δ_{q+1}`, the reference scale for the ratios.
    pub delta_next: f64,
}

impl StageDiagnostics {
    pub const COLUMNS: [&'static str; 32] = [
        "stage",
        "L1_R",
        "L1_drho",
        "W2r_dH",
        "Linf_dH",
        "L1_dflux",
        "inf_drho",
        "cutoff_window",
        "residual",
        "L1_R_prev",
        "L1_R_ell",
        "inf_drho_bound",
        "window_t0",
        "mass_drift",
        "theta_p_min",
        "mean_zero",
        "u_identity",
        "L1_R_quadr",
        "L1_R_defect",
        "L1_R_shell",
        "L1_R_time",
        "L1_R_flux",
        "L1_R_comm",
        "shell_min",
        "shell_max",
        "shell_bound",
        "lambda",
        "mu",
        "ell",
        "kappa",
        "delta_next",
        "ratio_L1_R_delta",
    ];

    /// Values in [`Self::COLUMNS`] order.
    pub fn row(&self) -> Vec<String> {
        let f = |v: f64| format!("{v:.10e}");
        vec![
            self.stage.to_string(),
            f(self.l1_r),
            f(self.l1_drho),
            f(self.w2r_dh),
            f(self.linf_dh),
            f(self.l1_dflux),
            f(self.inf_drho),
            f(self.cutoff_window),
            f(self.residual),
            f(self.l1_r_prev),
            f(self.l1_r_ell),
            f(self.inf_drho_bound),
            f(self.window_t0),
            f(self.mass_drift),
            f(self.theta_p_min),
            f(self.mean_zero),
            f(self.u_identity),
            f(self.l1_r_quadr),
            f(self.l1_r_defect),
            f(self.l1_r_shell),
            f(self.l1_r_time),
            f(self.l1_r_flux),
            f(self.l1_r_comm),
            self.shell_min.to_string(),
            self.shell_max.to_string(),
            self.shell_bound.to_string(),
            f(self.lambda),
            f(self.mu),
            f(self.ell),
            f(self.kappa),
            f(self.delta_next),
            f(self.l1_r / self.delta_next),
        ]
    }
}

/// Largest `t_j` such that `ρ ≡ 1` and `R ≡ 0` on every slice up to `j`.
pub fn constant_window(state: &IterationState) -> Option<usize> {
    let mut last = None;
    for j in 0..state.grid.n_t {
        let ok = state.rho.slice(j).values().iter().all(|v| (v - 1.0).abs() <= 1e-14)
            && state.r.slice(j).components().iter().all(|c| c.max_abs() <= 1e-14);
        if !ok {
            break;
        }
        last = Some(j);
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kernel_modes_round_trip_and_divergence_blindness() {
        let g = GridSpec::new(2, 16, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = ScalarField::from_vec(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let k = KernelModes::of(&f);
        assert!((k.mean() - f.mean()).abs() < 1e-14);
        let rest = k.remove_from(&f);
        assert!(KernelModes::of(&rest).max_abs() < 1e-14);
        let back = k.to_field(g);
        for i in 0..g.len() {
            assert!((back.values()[i] - k.value_at(&g, i)).abs() < 1e-14);
        }
        // The divergence of any field has no kernel content.
        let v = VectorField::from_components(vec![f.clone(), f.map(|x| x * x)]).unwrap();
        assert!(KernelModes::of(&divergence(&v)).max_abs() < 1e-12);
    }
}
