//! Perturbation assembly: the principal density perturbation `θ^{(p)}`, its corrector
//! `θ^{(c)}`, and the Hamiltonian/velocity perturbations `h`, `w`.
//!
//! Blocks are sampled once on the tile grid of `n/λ` points per axis and periodized by an
//! index map, which is exact for `x ↦ f(λx)` on the full grid. Spectral derivatives commute
//! with this map (the tile Nyquist mode lands on the full-grid Nyquist mode), so
//! `w = J∇h` holds to roundoff.
//!
//! The corrector removes from `θ^{(p)}(t,·)` its mean and its pure Nyquist checkerboards.
//! Those are the modes no discrete divergence can produce; removing only the mean would
//! leave an unbalanceable part of `∂_tθ^{(p)}` in the residual.

use super::{KernelModes, ParamSchedule, SchemeError};
use crate::blocks::BlockFamily;
use crate::field::{grad_inv_laplacian_with, Calculus, GridSpec, ScalarField, TimeField, VectorField};
use crate::geometry::DirectionSet;
use crate::profiles::{chi, chi_prime};

/// Smallest shell index kept in the sum.
pub const SHELL_FLOOR: usize = 12;
/// `χ` is supported in `(−3/4, 3/4)`.
const CHI_REACH: f64 = 0.75;

/// Stage-level data shared by every time slice.
#[derive(Clone, Debug)]
pub struct StagePerturbation {
    pub q: usize,
    pub lambda: usize,
    pub mu: f64,
    pub kappa: f64,
    pub grid: GridSpec,
    pub tile: GridSpec,
    pub ds: DirectionSet,
    /// Whether the tile grid meets the block resolution rule.
    pub resolved: bool,
    /// Full-grid flat index to tile flat index.
    tile_index: Vec<u32>,
    /// `Θ_{ξ,μ,1}` on the tile.
    pub theta_tile: Vec<ScalarField>,
    /// `V_{ξ,j} = λ^{−1} ∇Δ^{−1}(G_{ξ,j} − ⟨G_{ξ,j}⟩)` on the tile, `G_ξ = Θ_ξ X_ξ`.
    pub(crate) v_tile: Vec<Vec<VectorField>>,
    /// `⟨Θ_ξ X_ξ⟩` per direction (equals `ξ` when the tile resolves the blocks).
    pub mean_g: Vec<Vec<f64>>,
    pub h: ScalarField,
    pub w: VectorField,
}

/// Shell evaluation at one time slice.
#[derive(Clone, Debug)]
pub struct SliceShells {
    /// `C_ξ = Σ_n (n/κ) χ(κ|R_ℓ| − n) a_ξ(R̂_ℓ)`.
    pub c: Vec<ScalarField>,
    /// `∂_t C_ξ` through the chain rule.
    pub dc: Vec<ScalarField>,
    pub theta_p: ScalarField,
    pub dtheta_p: ScalarField,
    pub theta_c: KernelModes,
    pub dtheta_c: KernelModes,
    /// `R̃_ℓ = Σ_n χ(κ|R_ℓ| − n)(n/κ) R̂_ℓ`.
    pub r_tilde: VectorField,
    /// Active shells, `None` if none.
    pub shells: Option<(usize, usize)>,
}

impl StagePerturbation {
    pub fn new(grid: GridSpec, s: &ParamSchedule, ds: &DirectionSet, q: usize) -> Result<Self, SchemeError> {
        let lambda = s.lambda_int(q + 1)?;
        let mu = s.mu(q + 1);
        let kappa = s.kappa(q);
        let n = grid.n;
        let alias = |reason: String| SchemeError::AliasedLambda { lambda: lambda as f64, mu, n, reason };
        if n % lambda != 0 {
            return Err(alias("lambda must divide n".into()));
        }
        if (lambda as f64) * mu > (n / 2) as f64 {
            return Err(alias("lambda * mu exceeds the grid Nyquist frequency".into()));
        }
        let tile = GridSpec::new(grid.d, n / lambda, 2).map_err(|e| alias(format!("tile grid: {e}")))?;
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(SchemeError::BadParameter(format!("kappa_{q} = {kappa} is not representable")));
        }
        let bf = BlockFamily::build_unchecked(ds, mu, 1.0, s.p, tile, Calculus::Spectral)?;
        let tile_index = tile_map(&grid, tile.n);
        let scale = 0.5f64.powi(q as i32);
        let mut h = ScalarField::zeros(grid);
        let mut w = VectorField::zeros(grid);
        let (mut theta_tile, mut v_tile, mut mean_g) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..ds.len() {
            let theta = bf.theta(i);
            let ham = bf.ham(i);
            let x = bf.x_of(&ham);
            let hv = h.values_mut();
            for (k, v) in hv.iter_mut().enumerate() {
                *v += scale / lambda as f64 * ham.values()[tile_index[k] as usize];
            }
            for a in 0..grid.d {
                let xa = x.comp(a).values();
                for (k, v) in w.comp_mut(a).values_mut().iter_mut().enumerate() {
                    *v += scale * xa[tile_index[k] as usize];
                }
            }
            let mut vs = Vec::new();
            let mut means = Vec::new();
            for j in 0..grid.d {
                let mut g = theta.zip_map(x.comp(j), |a, b| a * b);
                let m = g.mean();
                g.add_constant(-m);
                let mut v = grad_inv_laplacian_with(&g, Calculus::Spectral);
                v.scale(1.0 / lambda as f64);
                vs.push(v);
                means.push(m);
            }
            theta_tile.push(theta);
            v_tile.push(vs);
            mean_g.push(means);
        }
        Ok(Self {
            q,
            lambda,
            mu,
            kappa,
            grid,
            tile,
            ds: ds.clone(),
            resolved: bf.resolved,
            tile_index,
            theta_tile,
            v_tile,
            mean_g,
            h,
            w,
        })
    }

    #[inline]
    pub(crate) fn tile_of(&self, k: usize) -> usize {
        self.tile_index[k] as usize
    }

    /// Shell sums and `θ^{(p)}` at one time slice. Without `dr_ell` the time derivatives
    /// are returned as zero.
    pub fn shells(&self, r_ell: &VectorField, dr_ell: Option<&VectorField>) -> SliceShells {
        let g = self.grid;
        let d = g.d;
        let nd = self.ds.len();
        let mut c = vec![vec![0.0; g.len()]; nd];
        let mut dc = vec![vec![0.0; g.len()]; nd];
        let mut rt = vec![vec![0.0; g.len()]; d];
        let mut shells: Option<(usize, usize)> = None;
        let (mut rv, mut dv, mut rhat, mut dhat) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
        for k in 0..g.len() {
            for a in 0..d {
                rv[a] = r_ell.comp(a).values()[k];
                dv[a] = dr_ell.map_or(0.0, |x| x.comp(a).values()[k]);
            }
            let r = rv.iter().map(|v| v * v).sum::<f64>().sqrt();
            let tau = self.kappa * r;
            if tau <= SHELL_FLOOR as f64 - CHI_REACH {
                continue;
            }
            let lo = ((tau - CHI_REACH).floor() as usize + 1).max(SHELL_FLOOR);
            let hi = (tau + CHI_REACH).ceil() as usize;
            let (mut sum, mut sum_p) = (0.0, 0.0);
            for nn in lo..=hi {
                let x = tau - nn as f64;
                let v = chi(x);
                if v > 0.0 {
                    shells = Some(shells.map_or((nn, nn), |(a, b)| (a.min(nn), b.max(nn))));
                }
                sum += nn as f64 * v;
                sum_p += nn as f64 * chi_prime(x);
            }
            if sum == 0.0 && sum_p == 0.0 {
                continue;
            }
            let coef = sum / self.kappa;
            let mut rdot = 0.0;
            for a in 0..d {
                rhat[a] = rv[a] / r;
                rdot += rhat[a] * dv[a];
            }
            for a in 0..d {
                dhat[a] = (dv[a] - rhat[a] * rdot) / r;
                rt[a][k] = coef * rhat[a];
            }
            let dcoef = sum_p * rdot;
            for (i, dir) in self.ds.directions.iter().enumerate() {
                let sg = dir.sign as f64;
                let a_xi = 0.5 * (1.0 + sg * rhat[dir.axis]);
                let da = 0.5 * sg * dhat[dir.axis];
                c[i][k] = coef * a_xi;
                dc[i][k] = dcoef * a_xi + coef * da;
            }
        }
        let to_field = |v: Vec<f64>| ScalarField::from_vec(g, v).expect("grid-sized");
        let c: Vec<ScalarField> = c.into_iter().map(to_field).collect();
        let dc: Vec<ScalarField> = dc.into_iter().map(to_field).collect();
        let theta_p = self.combine(&c);
        let dtheta_p = self.combine(&dc);
        let theta_c = KernelModes::of(&theta_p).negated();
        let dtheta_c = KernelModes::of(&dtheta_p).negated();
        let r_tilde = VectorField::from_components(rt.into_iter().map(to_field).collect()).expect("d components");
        SliceShells { c, dc, theta_p, dtheta_p, theta_c, dtheta_c, r_tilde, shells }
    }

    /// `2^q Σ_ξ f_ξ(x) Θ_ξ(λx)`.
    fn combine(&self, f: &[ScalarField]) -> ScalarField {
        let scale = 2f64.powi(self.q as i32);
        let mut out = vec![0.0; self.grid.len()];
        for (fi, th) in f.iter().zip(&self.theta_tile) {
            let tv = th.values();
            for (k, (o, v)) in out.iter_mut().zip(fi.values()).enumerate() {
                if *v != 0.0 {
                    *o += scale * v * tv[self.tile_of(k)];
                }
            }
        }
        ScalarField::from_vec(self.grid, out).expect("grid-sized")
    }
}

/// Full-grid flat index to tile flat index, `k ↦ k mod m` per axis.
fn tile_map(grid: &GridSpec, m: usize) -> Vec<u32> {
    let n = grid.n;
    (0..grid.len())
        .map(|idx| {
            let (mut rest, mut out, mut stride) = (idx, 0usize, 1usize);
            for _ in 0..grid.d {
                out += ((rest % n) % m) * stride;
                rest /= n;
                stride *= m;
            }
            out as u32
        })
        .collect()
}

/// Perturbation over all time slices.
#[derive(Clone, Debug)]
pub struct PerturbationBundle {
    pub theta_p: TimeField<ScalarField>,
    /// Corrector per time slice, as kernel-mode coefficients.
    pub theta_c: Vec<KernelModes>,
    pub h: ScalarField,
    pub w: VectorField,
    /// Active shell indices over all slices.
    pub n_range: Option<(usize, usize)>,
}

pub fn assemble_perturbation(
    r_ell: &TimeField<VectorField>,
    schedule: &ParamSchedule,
    ds: &DirectionSet,
    q: usize,
) -> Result<PerturbationBundle, SchemeError> {
    let grid = *r_ell.grid();
    let stage = StagePerturbation::new(grid, schedule, ds, q)?;
    let mut theta_p = Vec::new();
    let mut theta_c = Vec::new();
    let mut n_range: Option<(usize, usize)> = None;
    for r in r_ell.slices() {
        let sh = stage.shells(r, None);
        if let Some((a, b)) = sh.shells {
            n_range = Some(n_range.map_or((a, b), |(x, y)| (x.min(a), y.max(b))));
        }
        theta_p.push(sh.theta_p);
        theta_c.push(sh.theta_c);
    }
    Ok(PerturbationBundle { theta_p: TimeField::new(grid, theta_p)?, theta_c, h: stage.h, w: stage.w, n_range })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{apply_j, gradient};
    use crate::geometry::build_direction_set;
    use crate::scheme::{make_schedule, Mode, Overrides};

    fn setup(kappa_target: Option<f64>) -> (ParamSchedule, DirectionSet, GridSpec) {
        // λ_1 = 4, μ_1 = 4, n = 32: a tile of 8 points per axis.
        let beta = kappa_target.map_or(0.7, |k: f64| (20.0 / k).ln() / (-2.0 * 16f64.ln()));
        let o = Overrides { b: Some(2.0), beta: Some(beta), alpha: Some(2.0), gamma: Some(1.0) };
        let s = make_schedule(2.0, 1.0, 4, 2.0, Mode::Tame, o).unwrap();
        let ds = build_direction_set(4, 0.2).unwrap();
        (s, ds, GridSpec::new(4, 32, 3).unwrap())
    }

    #[test]
    fn zero_stress_gives_zero_perturbation() {
        let (s, ds, g) = setup(None);
        let st = StagePerturbation::new(g, &s, &ds, 0).unwrap();
        let sh = st.shells(&VectorField::zeros(g), None);
        assert_eq!(sh.theta_p.max_abs(), 0.0);
        assert_eq!(sh.theta_c.max_abs(), 0.0);
        assert!(sh.shells.is_none());
    }

    #[test]
    fn constant_stress_mid_shell() {
        let (s, ds, g) = setup(Some(100.0));
        let st = StagePerturbation::new(g, &s, &ds, 0).unwrap();
        assert!((st.kappa - 100.0).abs() < 1e-9);
        for (tau, want) in [(14.5, (14, 15)), (15.0, (15, 15))] {
            let c = tau / st.kappa;
            let mut r = VectorField::zeros(g);
            r.comp_mut(0).add_constant(c);
            let sh = st.shells(&r, None);
            assert_eq!(sh.shells, Some(want));
            assert!(sh.theta_p.min() >= 0.0);
            let total = sh.theta_p.mean() + sh.theta_c.mean();
            assert!(total.abs() <= 1e-12);
            let mut diff = sh.r_tilde.clone();
            diff.axpy(-1.0, &r);
            assert!(diff.max_abs() <= 1.5 / st.kappa);
            // C_{+e1} carries everything; C_{-e1} vanishes.
            assert!(sh.c[1].max_abs() == 0.0);
        }
    }

    #[test]
    fn w_is_symplectic_gradient_of_h() {
        // λ_1 = μ_1 = 2: a 16-point tile on which the blocks are non-trivial.
        let o = Overrides { b: Some(1.0), beta: Some(0.7), alpha: Some(2.0), gamma: Some(1.0) };
        let s = make_schedule(2.0, 1.0, 4, 2.0, Mode::Tame, o).unwrap();
        let ds = build_direction_set(4, 0.2).unwrap();
        let g = GridSpec::new(4, 32, 3).unwrap();
        let st = StagePerturbation::new(g, &s, &ds, 0).unwrap();
        assert!(st.w.max_abs() > 0.1);
        let u = apply_j(&gradient(&st.h)).unwrap();
        let mut diff = u.clone();
        diff.axpy(-1.0, &st.w);
        assert!(diff.max_abs() <= 1e-10 * st.w.max_abs(), "{}", diff.max_abs());
    }

    #[test]
    fn aliasing_rejected() {
        let o = Overrides { b: Some(2.0), beta: Some(0.7), alpha: Some(2.0), gamma: Some(2.0) };
        let s = make_schedule(2.0, 1.0, 4, 2.0, Mode::Tame, o).unwrap();
        let ds = build_direction_set(4, 0.2).unwrap();
        let g = GridSpec::new(4, 32, 3).unwrap();
        assert!(matches!(StagePerturbation::new(g, &s, &ds, 0), Err(SchemeError::AliasedLambda { .. })));
    }
}
