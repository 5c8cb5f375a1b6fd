//! Autonomous building blocks: the densities `Θ_{ξ,μ,σ}`, Hamiltonians `H_{ξ,μ}` and
//! fields `X_ξ = J∇H_{ξ,μ}`, concentrated at scale `1/μ` around the periodized lines
//! `v_ξ + ℝξ`.
//!
//! Transverse coordinates of `x` for `ξ` are `y = (ξ^⊥·(x − v_ξ), ξ_1·(x − v_ξ), …)`, each
//! taken on the circle. Then
//! `Θ = σ μ^{(d−1)/p} φ(μy)`, `H = μ^{−1} μ^{(d−1)/p′} ψ(μy)`.
//! `φ` is normalized by its discrete mass on the grid lattice so that
//! `∫Θ = σ μ^{−(d−1)/p′}` holds exactly for the sampled field.

use crate::field::{
    apply_j, gradient_with, stencil_divergence, stencil_partial, torus_delta, Calculus, FieldError, GridSpec, ScalarField,
    VectorField,
};
use crate::geometry::{verify_disjoint_supports, DirectionSet, DisjointReport};
use crate::profiles::{bump_prime, psi, psi_gradient, psi_hessian, Phi, ProfileError};
use crate::util::loglog_slope;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlockError {
    #[error("grid step 1/{n} exceeds rho/(2 mu) = {limit}; concentration {mu} is unresolved")]
    GridUnderResolved { n: usize, mu: f64, limit: f64 },
    #[error("the density profile has no mass on the grid lattice")]
    EmptyLattice,
    #[error("exponent p = {0} must lie in (1, inf)")]
    BadExponent(f64),
    #[error("sigma = {0} must be positive")]
    BadSigma(f64),
    #[error("scaling fit needs at least 2 concentrations, got {0}")]
    TooFewConcentrations(usize),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub fn dual_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Per-axis circle offsets `torus_delta(k/n − v_a)`, signed by the frame entry.
struct Transverse {
    axes: Vec<(usize, f64)>,
    delta: Vec<Vec<f64>>,
}

impl Transverse {
    fn new(ds: &DirectionSet, i: usize, n: usize) -> Self {
        let dir = &ds.directions[i];
        let v = dir.offset_f64();
        let delta = (0..ds.d).map(|a| (0..n).map(|k| torus_delta(k as f64 / n as f64 - v[a])).collect()).collect();
        Self { axes: dir.transverse(), delta }
    }

    fn coords(&self, m: &[usize], y: &mut [f64]) {
        for (o, &(a, s)) in y.iter_mut().zip(&self.axes) {
            *o = s * self.delta[a][m[a]];
        }
    }
}

/// Block fields for one direction.
#[derive(Clone, Debug)]
pub struct Block {
    pub theta: ScalarField,
    pub ham: ScalarField,
    pub x: VectorField,
}

/// The blocks for every `ξ ∈ Λ` at fixed `μ`, `σ`, `p`, built on demand one direction at a
/// time (a full family of `d = 4`, `n = 64` fields would not fit in memory at once).
#[derive(Clone, Debug)]
pub struct BlockFamily {
    pub ds: DirectionSet,
    pub mu: f64,
    pub sigma: f64,
    pub p: f64,
    pub p_prime: f64,
    pub grid: GridSpec,
    /// Derivative used for `X = J D H`: the central stencil keeps supports compact and the
    /// block identities exact on the grid; the spectral one matches the scheme calculus.
    pub calc: Calculus,
    /// Whether `1/n ≤ ρ/(2μ)`, the condition under which the identities are exact.
    pub resolved: bool,
    phi: Phi,
    lattice_mass: Vec<f64>,
}

impl BlockFamily {
    /// Checked constructor: requires the grid to resolve the concentration.
    pub fn build(ds: &DirectionSet, mu: f64, sigma: f64, p: f64, grid: GridSpec, calc: Calculus) -> Result<Self, BlockError> {
        let bf = Self::build_unchecked(ds, mu, sigma, p, grid, calc)?;
        if !bf.resolved {
            return Err(BlockError::GridUnderResolved { n: grid.n, mu, limit: ds.rho / (2.0 * mu) });
        }
        Ok(bf)
    }

    /// Builds without the resolution rule; `resolved` records whether it holds.
    pub fn build_unchecked(
        ds: &DirectionSet,
        mu: f64,
        sigma: f64,
        p: f64,
        grid: GridSpec,
        calc: Calculus,
    ) -> Result<Self, BlockError> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(BlockError::BadExponent(p));
        }
        if !(sigma > 0.0) {
            return Err(BlockError::BadSigma(sigma));
        }
        if grid.d != ds.d {
            return Err(BlockError::Field(FieldError::GridMismatch));
        }
        let phi = Phi::new(ds.rho, ds.d - 1)?;
        let resolved = grid.spacing() <= ds.rho / (2.0 * mu) * (1.0 + 1e-12);
        let mut bf = Self { ds: ds.clone(), mu, sigma, p, p_prime: dual_exponent(p), grid, calc, resolved, phi, lattice_mass: vec![] };
        bf.lattice_mass = (0..ds.len()).map(|i| bf.transverse_mass(i)).collect();
        if bf.lattice_mass.iter().any(|&m| m == 0.0) {
            return Err(BlockError::EmptyLattice);
        }
        Ok(bf)
    }

    pub fn len(&self) -> usize {
        self.ds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ds.is_empty()
    }

    fn dm1(&self) -> f64 {
        (self.ds.d - 1) as f64
    }

    /// `μ^{(d−1)/p′}`, the size of `X` on the support of `Θ`.
    pub fn field_amplitude(&self) -> f64 {
        self.mu.powf(self.dm1() / self.p_prime)
    }

    /// Mean of the unnormalized profile `φ(μy)` over the grid. The profile does not depend
    /// on the coordinate along `ξ`, so the transverse sub-lattice suffices.
    fn transverse_mass(&self, i: usize) -> f64 {
        let n = self.grid.n;
        let tr = Transverse::new(&self.ds, i, n);
        let axis = self.ds.directions[i].axis;
        let d = self.ds.d;
        let mut m = vec![0usize; d];
        let mut y = vec![0.0; d - 1];
        let mut sum = 0.0;
        for code in 0..n.pow(d as u32 - 1) {
            let mut c = code;
            for (a, slot) in m.iter_mut().enumerate() {
                if a != axis {
                    *slot = c % n;
                    c /= n;
                }
            }
            tr.coords(&m, &mut y);
            let r2: f64 = y.iter().map(|v| v * v).sum::<f64>() * self.mu * self.mu;
            sum += self.phi.shape_sq(r2);
        }
        sum / n.pow(d as u32 - 1) as f64
    }

    fn theta_factor(&self, i: usize) -> f64 {
        self.sigma * self.mu.powf(self.dm1() / self.p) * self.mu.powf(-self.dm1()) / self.lattice_mass[i]
    }

    fn sample(&self, i: usize, f: impl Fn(&[f64]) -> f64) -> ScalarField {
        let g = self.grid;
        let tr = Transverse::new(&self.ds, i, g.n);
        let mut m = vec![0usize; g.d];
        let mut y = vec![0.0; g.d - 1];
        let data = (0..g.len())
            .map(|idx| {
                g.multi_index(idx, &mut m);
                tr.coords(&m, &mut y);
                f(&y)
            })
            .collect();
        ScalarField::from_vec(g, data).expect("grid-sized")
    }

    /// `Θ_{ξ_i,μ,σ}` on the grid.
    pub fn theta(&self, i: usize) -> ScalarField {
        let c = self.theta_factor(i);
        let mu2 = self.mu * self.mu;
        self.sample(i, |y| c * self.phi.shape_sq(y.iter().map(|v| v * v).sum::<f64>() * mu2))
    }

    /// `H_{ξ_i,μ}` on the grid.
    pub fn ham(&self, i: usize) -> ScalarField {
        let amp = self.field_amplitude() / self.mu;
        let (mu, rho) = (self.mu, self.ds.rho);
        let reach = 2.0 * rho / mu;
        self.sample(i, |y| {
            if y.iter().any(|v| v.abs() >= reach) {
                return 0.0;
            }
            let z: Vec<f64> = y.iter().map(|v| v * mu).collect();
            amp * psi(&z, rho)
        })
    }

    /// `X = J D H` with the family's calculus.
    pub fn x_of(&self, ham: &ScalarField) -> VectorField {
        let grad = match self.calc {
            Calculus::Central => {
                VectorField::from_components((0..self.grid.d).map(|a| stencil_partial(ham, a)).collect()).expect("same grid")
            }
            Calculus::Spectral => gradient_with(ham, Calculus::Spectral),
        };
        apply_j(&grad).expect("even dimension")
    }

    pub fn block(&self, i: usize) -> Block {
        let ham = self.ham(i);
        let x = self.x_of(&ham);
        Block { theta: self.theta(i), ham, x }
    }
}

/// Identity residuals for one direction.
#[derive(Clone, Debug)]
pub struct DirectionCheck {
    pub index: usize,
    /// `‖div X‖_∞ / (n ‖X‖_∞)`; the stencil derivative is bounded by `n` times the sup.
    pub div_x: f64,
    /// `‖div(XΘ)‖_∞ / (n ‖XΘ‖_∞)`.
    pub div_x_theta: f64,
    /// `max_a |∫X_a|`.
    pub mean_x: f64,
    /// `|∫XΘ − σξ| / σ`.
    pub flux: f64,
    /// `max |X − μ^{(d−1)/p′} ξ| / μ^{(d−1)/p′}` over the support of `Θ`.
    pub x_on_theta_support: f64,
    /// Largest transverse radius where `Θ ≠ 0` resp. `X ≠ 0`.
    pub theta_radius: f64,
    pub x_radius: f64,
}

#[derive(Clone, Debug)]
pub struct BlockReport {
    pub mu: f64,
    pub sigma: f64,
    pub directions: Vec<DirectionCheck>,
    /// `(i, j, ∫|X_i||Θ_j|, ∫|X_i||X_j|)` for `i ≠ j`.
    pub overlaps: Vec<(usize, usize, f64, f64)>,
    pub disjoint: DisjointReport,
    /// Sup distance between the stencil and spectral `X` for the first direction, relative
    /// to `‖X‖_∞`; a cross-check only.
    pub spectral_cross_check: f64,
    pub tolerances: BlockTolerances,
}

#[derive(Clone, Copy, Debug)]
pub struct BlockTolerances {
    pub div_x: f64,
    pub div_x_theta: f64,
    pub mean_x: f64,
    pub flux: f64,
    pub pointwise: f64,
}

impl Default for BlockTolerances {
    fn default() -> Self {
        Self { div_x: 1e-10, div_x_theta: 1e-6, mean_x: 1e-12, flux: 1e-6, pointwise: 1e-8 }
    }
}

impl BlockReport {
    pub fn overlaps_vanish(&self) -> bool {
        self.overlaps.iter().all(|o| o.2 == 0.0 && o.3 == 0.0)
    }

    pub fn identities_pass(&self) -> bool {
        let t = &self.tolerances;
        self.directions.iter().all(|c| {
            c.div_x <= t.div_x
                && c.div_x_theta <= t.div_x_theta
                && c.mean_x <= t.mean_x
                && c.flux <= t.flux
                && c.x_on_theta_support <= t.pointwise
        })
    }

    pub fn pass(&self) -> bool {
        self.identities_pass() && self.overlaps_vanish() && self.disjoint.pass
    }
}

/// Sparse support of a field: sorted indices with their absolute values.
fn support(values: impl Iterator<Item = f64>) -> Vec<(usize, f64)> {
    values.enumerate().filter(|(_, v)| *v != 0.0).map(|(i, v)| (i, v.abs())).collect()
}

fn overlap(a: &[(usize, f64)], b: &[(usize, f64)], cell: f64) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s * cell
}

fn rel_sup(num: &ScalarField, scale: f64) -> f64 {
    if scale == 0.0 {
        num.max_abs()
    } else {
        num.max_abs() / scale
    }
}

/// Checks the building-block identities one direction at a time.
pub fn verify_block_lemma(bf: &BlockFamily) -> BlockReport {
    let g = bf.grid;
    let d = g.d;
    let n = g.n as f64;
    let amp = bf.field_amplitude();
    let mut checks = Vec::new();
    let mut x_supports = Vec::new();
    let mut theta_supports = Vec::new();
    let mut spectral_cross_check = 0.0;
    let mut m = vec![0usize; d];
    let mut y = vec![0.0; d - 1];
    for i in 0..bf.len() {
        let Block { theta, ham, x } = bf.block(i);
        let dir = &bf.ds.directions[i];
        let xi = dir.xi_f64();
        let tr = Transverse::new(&bf.ds, i, g.n);
        let radius_of = |idx: usize, m: &mut [usize], y: &mut [f64]| {
            g.multi_index(idx, m);
            tr.coords(m, y);
            y.iter().map(|v| v * v).sum::<f64>().sqrt()
        };

        let div_x = rel_sup(&stencil_divergence(&x), n * x.max_abs());
        let mut div_xt = ScalarField::zeros(g);
        let mut xt_sup: f64 = 0.0;
        let mut flux = vec![0.0; d];
        for a in 0..d {
            let xt = x.comp(a).zip_map(&theta, |u, v| u * v);
            xt_sup = xt_sup.max(xt.max_abs());
            flux[a] = xt.mean();
            div_xt.axpy(1.0, &stencil_partial(&xt, a));
        }
        let div_x_theta = rel_sup(&div_xt, n * xt_sup);
        let mean_x = x.mean().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let flux_err = flux.iter().zip(&xi).map(|(f, e)| (f - bf.sigma * e).powi(2)).sum::<f64>().sqrt() / bf.sigma;

        let ts = support(theta.values().iter().copied());
        let mag = x.magnitude();
        let xs = support(mag.values().iter().copied());
        let mut pointwise: f64 = 0.0;
        for &(idx, _) in &ts {
            for a in 0..d {
                pointwise = pointwise.max((x.comp(a).values()[idx] - amp * xi[a]).abs() / amp);
            }
        }
        let theta_radius = ts.iter().map(|&(idx, _)| radius_of(idx, &mut m, &mut y)).fold(0.0, f64::max);
        let x_radius = xs.iter().map(|&(idx, _)| radius_of(idx, &mut m, &mut y)).fold(0.0, f64::max);

        if i == 0 {
            let spec = apply_j(&gradient_with(&ham, Calculus::Spectral)).expect("even dimension");
            let mut diff = spec;
            diff.axpy(-1.0, &x);
            spectral_cross_check = diff.max_abs() / x.max_abs();
        }
        checks.push(DirectionCheck {
            index: i,
            div_x,
            div_x_theta,
            mean_x,
            flux: flux_err,
            x_on_theta_support: pointwise,
            theta_radius,
            x_radius,
        });
        x_supports.push(xs);
        theta_supports.push(ts);
    }
    let cell = 1.0 / g.len() as f64;
    let mut overlaps = Vec::new();
    for i in 0..bf.len() {
        for j in 0..bf.len() {
            if i != j {
                overlaps.push((i, j, overlap(&x_supports[i], &theta_supports[j], cell), overlap(&x_supports[i], &x_supports[j], cell)));
            }
        }
    }
    BlockReport {
        mu: bf.mu,
        sigma: bf.sigma,
        directions: checks,
        overlaps,
        disjoint: verify_disjoint_supports(&bf.ds, bf.mu),
        spectral_cross_check,
        tolerances: BlockTolerances::default(),
    }
}

/// Which block field a scaling fit refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockField {
    Theta,
    X,
    Ham,
}

impl BlockField {
    pub fn name(self) -> &'static str {
        match self {
            BlockField::Theta => "theta",
            BlockField::X => "x",
            BlockField::Ham => "h",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScalingFit {
    pub field: BlockField,
    pub k: usize,
    pub s: f64,
    pub mus: Vec<f64>,
    pub norms: Vec<f64>,
    pub slope: f64,
    pub predicted: f64,
}

/// Predicted `log μ` exponent of `‖D^k F‖_{L^s}`.
pub fn predicted_exponent(field: BlockField, d: usize, p: f64, s: f64, k: usize) -> f64 {
    let dm1 = (d - 1) as f64;
    let inv_s = if s.is_infinite() { 0.0 } else { 1.0 / s };
    let pp = dual_exponent(p);
    match field {
        BlockField::Theta => k as f64 + dm1 * (1.0 / p - inv_s),
        BlockField::X => k as f64 + dm1 * (1.0 / pp - inv_s),
        BlockField::Ham => k as f64 - 1.0 + dm1 * (1.0 / pp - inv_s),
    }
}

/// `‖D^k F‖_{L^s}` of a block, evaluated on the transverse torus `T^{d−1}` with `n` points
/// per axis. Blocks are constant along `ξ`, so this equals the norm on `T^d`. Only the
/// bounding box of the support is visited; derivatives are the closed-form chain rule.
pub fn transverse_norm(
    field: BlockField,
    d: usize,
    rho: f64,
    sigma: f64,
    p: f64,
    mu: f64,
    n: usize,
    k: usize,
    s: f64,
) -> Result<f64, BlockError> {
    if k > 1 {
        return Err(BlockError::Field(FieldError::BadGrid(format!("derivative order {k} not supported"))));
    }
    if (n as f64).recip() > rho / (2.0 * mu) * (1.0 + 1e-12) {
        return Err(BlockError::GridUnderResolved { n, mu, limit: rho / (2.0 * mu) });
    }
    let m = d - 1;
    let dm1 = m as f64;
    let phi = Phi::new(rho, m)?;
    let pp = dual_exponent(p);
    let reach = if field == BlockField::Theta { rho / mu } else { 2.0 * rho / mu };
    let half = (reach * n as f64).ceil() as i64;
    let side = (2 * half + 1) as usize;
    let mut y = vec![0.0; m];
    let mut acc = 0.0f64;
    for code in 0..side.pow(m as u32) {
        let mut c = code;
        for v in y.iter_mut() {
            *v = ((c % side) as i64 - half) as f64 / n as f64;
            c /= side;
        }
        let z: Vec<f64> = y.iter().map(|v| v * mu).collect();
        let val = match (field, k) {
            (BlockField::Theta, 0) => sigma * mu.powf(dm1 / p) * phi.eval(&z),
            (BlockField::Theta, _) => {
                let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                sigma * mu.powf(dm1 / p) * mu * phi.c * bump_prime((r / rho).min(1.0)).abs() / rho
            }
            (BlockField::Ham, 0) => mu.powf(dm1 / pp) / mu * psi(&z, rho).abs(),
            (BlockField::Ham, _) | (BlockField::X, 0) => {
                mu.powf(dm1 / pp) * psi_gradient(&z, rho).iter().map(|v| v * v).sum::<f64>().sqrt()
            }
            (BlockField::X, _) => mu.powf(dm1 / pp) * mu * psi_hessian(&z, rho).iter().map(|v| v * v).sum::<f64>().sqrt(),
        };
        if s.is_infinite() {
            acc = acc.max(val);
        } else {
            acc += val.powf(s);
        }
    }
    if s.is_infinite() {
        Ok(acc)
    } else {
        Ok((acc / (n as f64).powi(m as i32)).powf(1.0 / s))
    }
}

/// Fits `log ‖D^k F‖_{L^s}` against `log μ` for `Θ`, `X` and `H`.
pub fn measure_scaling(
    ds: &DirectionSet,
    sigma: f64,
    p: f64,
    s: f64,
    k: usize,
    mu_list: &[f64],
    n: usize,
) -> Result<Vec<ScalingFit>, BlockError> {
    if mu_list.len() < 2 {
        return Err(BlockError::TooFewConcentrations(mu_list.len()));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(BlockError::BadExponent(p));
    }
    [BlockField::Theta, BlockField::X, BlockField::Ham]
        .into_iter()
        .map(|field| {
            let norms = mu_list
                .iter()
                .map(|&mu| transverse_norm(field, ds.d, ds.rho, sigma, p, mu, n, k, s))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ScalingFit {
                field,
                k,
                s,
                mus: mu_list.to_vec(),
                slope: loglog_slope(mu_list, &norms),
                norms,
                predicted: predicted_exponent(field, ds.d, p, s, k),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_direction_set;

    fn small() -> BlockFamily {
        let ds = build_direction_set(4, 0.125).unwrap();
        BlockFamily::build(&ds, 2.0, 1.5, 2.0, GridSpec::new(4, 32, 2).unwrap(), Calculus::Central).unwrap()
    }

    #[test]
    fn theta_has_lattice_mass_and_sign() {
        let bf = small();
        for i in [0, 3, 6] {
            let th = bf.theta(i);
            let want = bf.sigma * bf.mu.powf(-3.0 / bf.p_prime);
            assert!((th.mean() - want).abs() < 1e-13 * want);
            assert!(th.min() >= 0.0);
        }
    }

    #[test]
    fn ham_is_linear_on_theta_support() {
        let bf = small();
        let (th, h) = (bf.theta(2), bf.ham(2));
        let dir = &bf.ds.directions[2];
        let (perp, s) = dir.transverse()[0];
        let v = dir.offset_f64();
        let g = bf.grid;
        let mut x = vec![0.0; 4];
        for idx in 0..g.len() {
            if th.values()[idx] != 0.0 {
                g.point(idx, &mut x);
                let want = bf.field_amplitude() * s * torus_delta(x[perp] - v[perp]);
                assert!((h.values()[idx] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lemma_on_small_grid() {
        let r = verify_block_lemma(&small());
        assert!(r.identities_pass(), "{:?}", r.directions);
        assert!(r.overlaps_vanish());
        assert!(r.disjoint.pass);
        let c = &r.directions[0];
        assert!(c.theta_radius < 0.125 / 2.0);
        assert!(c.x_radius < 0.25 / 2.0 + 1.0 / 32.0);
    }

    #[test]
    fn unresolved_and_bad_inputs() {
        let ds = build_direction_set(4, 0.125).unwrap();
        let g = GridSpec::new(4, 16, 2).unwrap();
        assert!(matches!(BlockFamily::build(&ds, 4.0, 1.0, 2.0, g, Calculus::Central), Err(BlockError::GridUnderResolved { .. })));
        let bf = BlockFamily::build_unchecked(&ds, 4.0, 1.0, 2.0, g, Calculus::Central).unwrap();
        assert!(!bf.resolved);
        assert!(matches!(BlockFamily::build(&ds, 2.0, 1.0, 1.0, g, Calculus::Central), Err(BlockError::BadExponent(_))));
        assert!(matches!(BlockFamily::build(&ds, 2.0, -1.0, 2.0, g, Calculus::Central), Err(BlockError::BadSigma(_))));
    }

    #[test]
    fn predicted_exponents() {
        assert_eq!(predicted_exponent(BlockField::Theta, 4, 2.0, 1.0, 0), -1.5);
        assert_eq!(predicted_exponent(BlockField::X, 4, 2.0, 2.0, 0), 0.0);
        assert_eq!(predicted_exponent(BlockField::Theta, 4, 2.0, 2.0, 0), 0.0);
        assert_eq!(predicted_exponent(BlockField::Ham, 4, 2.0, 2.0, 1), 0.0);
        assert_eq!(predicted_exponent(BlockField::X, 4, 2.0, f64::INFINITY, 1), 2.5);
    }

    #[test]
    fn theta_l1_norm_is_exact_in_closed_form() {
        // ‖Θ‖_{L¹} = σ μ^{(d−1)/p − (d−1)}, up to lattice quadrature of the unit-mass bump
        // (16 points per support radius here).
        let v = transverse_norm(BlockField::Theta, 4, 0.125, 1.0, 2.0, 4.0, 512, 0, 1.0).unwrap();
        assert!((v - 4f64.powf(-1.5)).abs() < 1e-5 * v);
    }
}
