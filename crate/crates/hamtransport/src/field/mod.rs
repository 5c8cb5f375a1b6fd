//! Periodic scalar and vector fields on `T^d`, spectral calculus, norms and
//! time-indexed families.

mod grid;
mod spectral;
mod time;

pub use grid::{torus_delta, GridSpec};
pub use spectral::{
    divergence, divergence_with, grad_inv_laplacian_with, gradient, gradient_with, inv_laplacian,
    partial, sobolev_norm, Calculus, Spectrum,
};
pub use time::{time_derivative, TimeField};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("dimension {0} is not even; the symplectic matrix needs d = 2d'")]
    OddDimension(usize),
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("exponent {0} is not admissible (need p >= 1 or p = inf)")]
    BadExponent(f64),
    #[error("time derivative needs at least 5 slices, got {0}")]
    TooFewSlices(usize),
    #[error("fields live on different grids")]
    GridMismatch,
}

/// Real samples of a function on the uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, data: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self { grid, data: vec![c; grid.len()] }
    }

    pub fn from_vec(grid: GridSpec, data: Vec<f64>) -> Result<Self, FieldError> {
        if data.len() != grid.len() {
            return Err(FieldError::BadGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                data.len()
            )));
        }
        Ok(Self { grid, data })
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let mut x = vec![0.0; grid.d];
        let data = (0..grid.len())
            .map(|i| {
                grid.point(i, &mut x);
                f(&x)
            })
            .collect();
        Self { grid, data }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    /// Arithmetic average, the rectangle rule on the unit torus.
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(self.grid.same_space(&other.grid), "grid mismatch");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid, data }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        assert!(self.grid.same_space(&other.grid), "grid mismatch");
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    pub fn add_constant(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v += c);
    }

    /// Discrete `∫ f g`.
    pub fn integral_product(&self, other: &Self) -> f64 {
        assert!(self.grid.same_space(&other.grid), "grid mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>() / self.data.len() as f64
    }

    /// Discrete `L^p` norm with weights `n^{-d}`; `p = inf` gives the max.
    pub fn lp_norm(&self, p: f64) -> Result<f64, FieldError> {
        lp_of(self.data.iter().map(|v| v.abs()), self.data.len(), p)
    }

    /// Retags the samples with another grid of the same spatial shape.
    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        assert!(self.grid.same_space(&grid), "grid mismatch");
        self.grid = grid;
        self
    }
}

/// `d` component fields sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, comps: (0..grid.d).map(|_| ScalarField::zeros(grid)).collect() }
    }

    pub fn from_components(comps: Vec<ScalarField>) -> Result<Self, FieldError> {
        let grid = *comps.first().ok_or(FieldError::GridMismatch)?.grid();
        if comps.len() != grid.d || comps.iter().any(|c| !c.grid().same_space(&grid)) {
            return Err(FieldError::GridMismatch);
        }
        Ok(Self { grid, comps })
    }

    /// Constant vector field.
    pub fn constant(grid: GridSpec, v: &[f64]) -> Self {
        Self { grid, comps: v.iter().map(|&c| ScalarField::constant(grid, c)).collect() }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn comp(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    pub fn comp_mut(&mut self, i: usize) -> &mut ScalarField {
        &mut self.comps[i]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.comps
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid);
        for c in &self.comps {
            for (o, v) in out.values_mut().iter_mut().zip(c.values()) {
                *o += v * v;
            }
        }
        out.values_mut().iter_mut().for_each(|v| *v = v.sqrt());
        out
    }

    pub fn mean(&self) -> Vec<f64> {
        self.comps.iter().map(|c| c.mean()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude().max_abs()
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (s, o) in self.comps.iter_mut().zip(&other.comps) {
            s.axpy(a, o);
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.comps.iter_mut().for_each(|c| c.scale(a));
    }

    /// `self += f * v` with a scalar field `f`.
    pub fn add_scaled_by(&mut self, f: &ScalarField, v: &Self) {
        for (s, o) in self.comps.iter_mut().zip(&v.comps) {
            for ((sv, ov), fv) in s.values_mut().iter_mut().zip(o.values()).zip(f.values()) {
                *sv += fv * ov;
            }
        }
    }

    /// Pointwise product `f v`.
    pub fn times_scalar(&self, f: &ScalarField) -> Self {
        let comps = self.comps.iter().map(|c| c.zip_map(f, |a, b| a * b)).collect();
        Self { grid: self.grid, comps }
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &Self) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid);
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for ((o, x), y) in out.values_mut().iter_mut().zip(a.values()).zip(b.values()) {
                *o += x * y;
            }
        }
        out
    }

    /// `L^p` norm of the pointwise magnitude.
    pub fn lp_norm(&self, p: f64) -> Result<f64, FieldError> {
        self.magnitude().lp_norm(p)
    }

    /// Componentwise `∫ v`.
    pub fn integral(&self) -> Vec<f64> {
        self.mean()
    }

    pub fn with_grid(self, grid: GridSpec) -> Self {
        let comps = self.comps.into_iter().map(|c| c.with_grid(grid)).collect();
        Self { grid, comps }
    }
}

/// Three-point central difference `(f(x + h e_a) − f(x − h e_a)) / 2h` evaluated in
/// physical space, so it vanishes exactly wherever both neighbours vanish.
pub fn stencil_partial(f: &ScalarField, axis: usize) -> ScalarField {
    let g = *f.grid();
    let (n, stride) = (g.n, g.stride(axis));
    let inv = 0.5 * n as f64;
    let src = f.values();
    let mut out = vec![0.0; src.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let k = (idx / stride) % n;
        let base = idx - k * stride;
        let up = base + ((k + 1) % n) * stride;
        let down = base + ((k + n - 1) % n) * stride;
        *o = (src[up] - src[down]) * inv;
    }
    ScalarField { grid: g, data: out }
}

/// Stencil divergence `Σ_a D_a v_a` built from [`stencil_partial`].
pub fn stencil_divergence(v: &VectorField) -> ScalarField {
    let mut out = ScalarField::zeros(*v.grid());
    for (a, c) in v.components().iter().enumerate() {
        out.axpy(1.0, &stencil_partial(c, a));
    }
    out
}

impl ScalarField {
    /// `x ↦ f(λx)` sampled on the grid with `λ` times as many points per axis.
    pub fn tile(&self, lambda: usize) -> Result<ScalarField, FieldError> {
        let g = self.grid;
        let fine = g.with_n(g.n * lambda)?;
        let (n, nf) = (g.n, fine.n);
        let mut data = vec![0.0; fine.len()];
        for (idx, v) in data.iter_mut().enumerate() {
            let (mut rest, mut coarse, mut stride) = (idx, 0, 1);
            for _ in 0..g.d {
                coarse += ((rest % nf) % n) * stride;
                rest /= nf;
                stride *= n;
            }
            *v = self.data[coarse];
        }
        Ok(ScalarField { grid: fine, data })
    }
}

/// Pointwise `J v` with `J = [[0, I], [-I, 0]]`.
pub fn apply_j(v: &VectorField) -> Result<VectorField, FieldError> {
    let d = v.grid().d;
    if d % 2 != 0 {
        return Err(FieldError::OddDimension(d));
    }
    let h = d / 2;
    let comps = (0..d)
        .map(|i| if i < h { v.comp(i + h).clone() } else { v.comp(i - h).map(|x| -x) })
        .collect();
    Ok(VectorField { grid: *v.grid(), comps })
}

/// `J v` for a plain coordinate vector.
pub fn apply_j_vec(v: &[f64]) -> Vec<f64> {
    let h = v.len() / 2;
    (0..v.len()).map(|i| if i < h { v[i + h] } else { -v[i - h] }).collect()
}

pub(crate) fn lp_of(abs: impl Iterator<Item = f64>, len: usize, p: f64) -> Result<f64, FieldError> {
    if p.is_infinite() && p > 0.0 {
        return Ok(abs.fold(0.0, f64::max));
    }
    if !(p >= 1.0) {
        return Err(FieldError::BadExponent(p));
    }
    let s: f64 = if p == 1.0 { abs.sum() } else if p == 2.0 { abs.map(|v| v * v).sum() } else { abs.map(|v| v.powf(p)).sum() };
    Ok((s / len as f64).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn g2(n: usize) -> GridSpec {
        GridSpec::new(2, n, 2).unwrap()
    }

    #[test]
    fn stencil_matches_central_symbol_and_tiling_repeats() {
        let g = GridSpec::new(4, 8, 2).unwrap();
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin() * (4.0 * PI * x[3]).cos() + x[1].powi(2) * x[2]);
        for a in 0..4 {
            let s = stencil_partial(&f, a);
            let c = partial(&f, a, Calculus::Central);
            let err = s.values().iter().zip(c.values()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(err < 1e-11, "axis {a}: {err}");
        }
        let t = f.tile(2).unwrap();
        assert_eq!(t.grid().n, 16);
        let mut m = [0usize; 4];
        for idx in [0usize, 17, 4095, 33333] {
            t.grid().multi_index(idx, &mut m);
            let coarse: usize = (0..4).map(|a| (m[a] % 8) * 8usize.pow(a as u32)).sum();
            assert_eq!(t.values()[idx], f.values()[coarse]);
        }
    }

    #[test]
    fn lp_norm_examples() {
        let g = g2(32);
        let one = ScalarField::constant(g, 1.0);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert!((one.lp_norm(p).unwrap() - 1.0).abs() < 1e-14);
        }
        let s = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin());
        assert!((s.lp_norm(2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        let g = g2(2048);
        let s = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin());
        assert!((s.lp_norm(1.0).unwrap() - 2.0 / PI).abs() < 1e-6);
        assert!(matches!(s.lp_norm(0.5), Err(FieldError::BadExponent(_))));
    }

    #[test]
    fn j_on_basis_vectors() {
        assert_eq!(apply_j_vec(&[0.0, 0.0, 1.0, 0.0]), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(apply_j_vec(&[1.0, 0.0, 0.0, 0.0]), vec![0.0, 0.0, -1.0, 0.0]);
    }

    proptest! {
        #[test]
        fn j_squared_is_minus_identity_and_isometric(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = GridSpec::new(4, 8, 2).unwrap();
            let comps = (0..4).map(|_| ScalarField::from_fn(g, |_| rng.gen_range(-1.0..1.0))).collect();
            let v = VectorField::from_components(comps).unwrap();
            let jv = apply_j(&v).unwrap();
            let jjv = apply_j(&jv).unwrap();
            for i in 0..4 {
                for (a, b) in jjv.comp(i).values().iter().zip(v.comp(i).values()) {
                    prop_assert_eq!(*a, -*b);
                }
            }
            let (a, b) = (jv.lp_norm(2.0).unwrap(), v.lp_norm(2.0).unwrap());
            prop_assert!((a - b).abs() <= 1e-15 * b);
        }
    }
}
