//! Anti-divergences on the torus: `A = ∇Δ^{−1}` and the improved operator
//! `𝓡(f g_λ) = f A g_λ − A(∇f · A g_λ + ∫f g_λ)`, which gains a factor `1/λ` when `g_λ`
//! oscillates at frequency `λ`. Also the improved-Hölder and mean-interaction diagnostics.

use crate::field::{divergence, grad_inv_laplacian_with, gradient, Calculus, FieldError, ScalarField, Spectrum, VectorField};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AntidivError {
    #[error("input mean {mean:e} exceeds 1e-10 times its sup {sup:e}")]
    NonZeroMean { mean: f64, sup: f64 },
    #[error("lambda {lambda} times bandwidth {bandwidth} reaches the Nyquist index {nyquist}")]
    AliasedLambda { lambda: usize, bandwidth: usize, nyquist: usize },
    #[error("lambda must be at least 1")]
    BadLambda,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Relative size of the mean below which a field counts as mean-free.
pub const MEAN_TOL: f64 = 1e-10;

/// Coefficients below this fraction of the largest one are ignored when measuring bandwidth.
pub const BANDWIDTH_TOL: f64 = 1e-12;

fn check_mean(g: &ScalarField) -> Result<(), AntidivError> {
    let (mean, sup) = (g.mean(), g.max_abs());
    if mean.abs() > MEAN_TOL * sup {
        return Err(AntidivError::NonZeroMean { mean, sup });
    }
    Ok(())
}

/// `∇Δ^{−1} g` for mean-free `g`; the result is mean-free and `div v = g`.
pub fn grad_inv_laplacian(g: &ScalarField) -> Result<VectorField, AntidivError> {
    check_mean(g)?;
    Ok(grad_inv_laplacian_with(g, Calculus::Spectral))
}

/// An anti-divergence together with its divergence residual.
#[derive(Clone, Debug)]
pub struct AntidivResult {
    pub field: VectorField,
    /// `‖div field − (f g_λ − ∫f g_λ)‖_∞ / ‖f g_λ‖_∞`.
    pub residual: f64,
}

/// `x ↦ g(λx)` on the same grid, by the index map `k ↦ λk mod n`. Exact when `λ` times the
/// bandwidth of `g` stays below the Nyquist index.
pub fn rescale(g: &ScalarField, lambda: usize) -> Result<ScalarField, AntidivError> {
    if lambda == 0 {
        return Err(AntidivError::BadLambda);
    }
    let grid = *g.grid();
    let bandwidth = Spectrum::of(g).bandwidth(BANDWIDTH_TOL);
    let nyquist = grid.n / 2;
    if lambda * bandwidth >= nyquist {
        return Err(AntidivError::AliasedLambda { lambda, bandwidth, nyquist });
    }
    let mut m = vec![0usize; grid.d];
    let data = (0..grid.len())
        .map(|idx| {
            grid.multi_index(idx, &mut m);
            let src: usize = m.iter().enumerate().map(|(a, &k)| ((lambda * k) % grid.n) * grid.stride(a)).sum();
            g.values()[src]
        })
        .collect();
    Ok(ScalarField::from_vec(grid, data)?)
}

/// `𝓡(f g_λ)` with `g_λ` already sampled, normalized to zero mean; no preconditions are checked.
pub fn antidiv_product(f: &ScalarField, g_lambda: &ScalarField) -> VectorField {
    let a = grad_inv_laplacian_with(g_lambda, Calculus::Spectral);
    let df = gradient(f);
    let mut inner = df.dot(&a);
    inner.add_constant(f.integral_product(g_lambda));
    let mut out = a.times_scalar(f);
    out.axpy(-1.0, &grad_inv_laplacian_with(&inner, Calculus::Spectral));
    // The product f A g_λ need not be mean-free; removing the mean leaves the divergence intact.
    for c in 0..out.grid().d {
        let m = out.comp(c).mean();
        out.comp_mut(c).add_constant(-m);
    }
    out
}

/// `𝓡(f g_λ)` with the divergence residual measured against `f g_λ − ∫f g_λ`.
pub fn improved_antidivergence(f: &ScalarField, g: &ScalarField, lambda: usize) -> Result<AntidivResult, AntidivError> {
    if !f.grid().same_space(g.grid()) {
        return Err(FieldError::GridMismatch.into());
    }
    check_mean(g)?;
    let gl = rescale(g, lambda)?;
    let field = antidiv_product(f, &gl);
    let mut target = f.zip_map(&gl, |a, b| a * b);
    let scale = target.max_abs();
    target.add_constant(-target.mean());
    let mut diff = divergence(&field);
    diff.axpy(-1.0, &target);
    let residual = if scale == 0.0 { diff.max_abs() } else { diff.max_abs() / scale };
    Ok(AntidivResult { field, residual })
}

/// `‖f‖_∞ + ‖∇f‖_∞` on the grid.
pub fn c1_norm(f: &ScalarField) -> f64 {
    f.max_abs() + gradient(f).magnitude().max_abs()
}

/// Both sides of the improved Hölder inequality and of the mean-interaction bound.
#[derive(Clone, Debug)]
pub struct HolderGap {
    pub lambda: usize,
    /// `‖f g_λ‖_{L^p}`.
    pub lhs: f64,
    /// `‖f‖_p ‖g‖_p + C √d ‖f‖_{C¹} ‖g‖_p / λ^{1/p}`.
    pub rhs: f64,
    pub slack: f64,
    /// Smallest `C` for which the inequality holds on this input.
    pub best_constant: f64,
    /// `|∫f g_λ| − |∫f| |∫g|`.
    pub mean_lhs: f64,
    /// `√d ‖f‖_{C¹} ‖g‖_{L¹} / λ`.
    pub mean_rhs: f64,
}

impl HolderGap {
    pub fn holds(&self) -> bool {
        self.slack >= 0.0 && self.mean_lhs <= self.mean_rhs
    }
}

pub fn improved_holder_gap(f: &ScalarField, g: &ScalarField, lambda: usize, p: f64, c: f64) -> Result<HolderGap, AntidivError> {
    let gl = rescale(g, lambda)?;
    let prod = f.zip_map(&gl, |a, b| a * b);
    let lhs = prod.lp_norm(p)?;
    let (fp, gp) = (f.lp_norm(p)?, g.lp_norm(p)?);
    let sqrt_d = (f.grid().d as f64).sqrt();
    let c1 = c1_norm(f);
    let lam = lambda as f64;
    let correction = sqrt_d * c1 * gp / lam.powf(1.0 / p);
    let rhs = fp * gp + c * correction;
    let best_constant = if correction > 0.0 { ((lhs - fp * gp) / correction).max(0.0) } else { 0.0 };
    let mean_lhs = prod.mean().abs() - f.mean().abs() * g.mean().abs();
    let mean_rhs = sqrt_d * c1 * g.lp_norm(1.0)? / lam;
    Ok(HolderGap { lambda, lhs, rhs, slack: rhs - lhs, best_constant, mean_lhs, mean_rhs })
}
