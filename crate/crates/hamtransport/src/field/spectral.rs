//! Discrete Fourier calculus on the uniform grid.
//!
//! Every differential operator here is a Fourier multiplier, so they commute
//! exactly (up to roundoff). Two derivative symbols are available: the exact
//! spectral one `2πk` (odd derivatives drop the Nyquist mode) and the compact
//! second-order central difference `n sin(2πk/n)`, which has a three-point stencil
//! and therefore keeps compact supports compact.

use super::{lp_of, FieldError, GridSpec, ScalarField, VectorField};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Unnormalized in-place d-dimensional FFT.
fn fft_nd(data: &mut [Complex64], grid: &GridSpec, inverse: bool) {
    let n = grid.n;
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
    let mut buf: Vec<Complex64> = Vec::new();
    for axis in 1..grid.d {
        let s = grid.stride(axis);
        let block = s * n;
        buf.resize(block, Complex64::default());
        for chunk in data.chunks_mut(block) {
            for j in 0..n {
                let row = &chunk[j * s..(j + 1) * s];
                for (inner, v) in row.iter().enumerate() {
                    buf[inner * n + j] = *v;
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for j in 0..n {
                let row = &mut chunk[j * s..(j + 1) * s];
                for (inner, v) in row.iter_mut().enumerate() {
                    *v = buf[inner * n + j];
                }
            }
        }
    }
}

/// Choice of discrete derivative symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Calculus {
    /// Exact derivative of the trigonometric interpolant.
    #[default]
    Spectral,
    /// Second-order central difference `(f(x+h) - f(x-h)) / 2h`.
    Central,
}

impl Calculus {
    /// Real symbol `s(k)` such that the derivative multiplies mode `k` by `i s(k)`.
    pub fn symbol(self, k: i64, n: usize) -> f64 {
        match self {
            Calculus::Spectral => {
                if 2 * k.unsigned_abs() as usize == n {
                    0.0
                } else {
                    2.0 * PI * k as f64
                }
            }
            Calculus::Central => n as f64 * (2.0 * PI * k as f64 / n as f64).sin(),
        }
    }

    fn table(self, grid: &GridSpec) -> Vec<f64> {
        (0..grid.n).map(|j| self.symbol(grid.wavenumber(j), grid.n)).collect()
    }
}

/// Fourier coefficients `f̂_k` with `f(x) = Σ f̂_k e^{2πik·x}`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(f: &ScalarField) -> Self {
        let grid = *f.grid();
        let mut coeffs: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut coeffs, &grid, false);
        let inv = 1.0 / grid.len() as f64;
        coeffs.iter_mut().for_each(|c| *c *= inv);
        Self { grid, coeffs }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, coeffs: vec![Complex64::default(); grid.len()] }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Real part of the inverse transform.
    pub fn to_field(&self) -> ScalarField {
        let mut buf = self.coeffs.clone();
        fft_nd(&mut buf, &self.grid, true);
        ScalarField::from_vec(self.grid, buf.into_iter().map(|c| c.re).collect())
            .expect("length preserved")
    }

    /// Multiplies every coefficient by `m(k)` where `k` is the FFT index tuple.
    pub fn multiply(&self, m: impl Fn(&[usize]) -> Complex64) -> Self {
        let mut out = self.clone();
        let mut idx = vec![0usize; self.grid.d];
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            self.grid.multi_index(i, &mut idx);
            *c *= m(&idx);
        }
        out
    }

    /// Multiplier built from a real per-axis product table (derivative monomials).
    fn monomial(&self, tables: &[Vec<f64>], powers: &[usize]) -> Self {
        let order: usize = powers.iter().sum();
        let unit = match order % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        self.multiply(|k| {
            let mut r = 1.0;
            for (a, &pw) in powers.iter().enumerate() {
                if pw > 0 {
                    r *= tables[a][k[a]].powi(pw as i32);
                }
            }
            unit * r
        })
    }

    /// Largest `max_a |k_a|` over coefficients above `tol · max|f̂|`.
    pub fn bandwidth(&self, tol: f64) -> usize {
        let cmax = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if cmax == 0.0 {
            return 0;
        }
        let mut idx = vec![0usize; self.grid.d];
        let mut bw = 0usize;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm() > tol * cmax {
                self.grid.multi_index(i, &mut idx);
                for &j in &idx {
                    bw = bw.max(self.grid.wavenumber(j).unsigned_abs() as usize);
                }
            }
        }
        bw
    }

    /// Sum of squared coefficient magnitudes (Parseval side).
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `∂_axis f` with the chosen symbol.
pub fn partial(f: &ScalarField, axis: usize, calc: Calculus) -> ScalarField {
    let grid = *f.grid();
    let table = calc.table(&grid);
    Spectrum::of(f)
        .multiply(|k| Complex64::new(0.0, table[k[axis]]))
        .to_field()
}

/// Spectral gradient (exact derivative of the trigonometric interpolant).
pub fn gradient(f: &ScalarField) -> VectorField {
    gradient_with(f, Calculus::Spectral)
}

pub fn gradient_with(f: &ScalarField, calc: Calculus) -> VectorField {
    let grid = *f.grid();
    let table = calc.table(&grid);
    let spec = Spectrum::of(f);
    let comps = (0..grid.d)
        .map(|a| spec.multiply(|k| Complex64::new(0.0, table[k[a]])).to_field())
        .collect();
    VectorField::from_components(comps).expect("d components")
}

/// Spectral divergence.
pub fn divergence(v: &VectorField) -> ScalarField {
    divergence_with(v, Calculus::Spectral)
}

pub fn divergence_with(v: &VectorField, calc: Calculus) -> ScalarField {
    let grid = *v.grid();
    let table = calc.table(&grid);
    let mut acc = Spectrum::zeros(grid);
    let mut idx = vec![0usize; grid.d];
    for a in 0..grid.d {
        let s = Spectrum::of(v.comp(a));
        for (i, (o, c)) in acc.coeffs.iter_mut().zip(&s.coeffs).enumerate() {
            grid.multi_index(i, &mut idx);
            *o += c * Complex64::new(0.0, table[idx[a]]);
        }
    }
    acc.to_field()
}

/// `Δ^{-1}` with the Laplacian taken as `div ∘ grad` of the chosen symbol.
/// Modes where that symbol vanishes (the constant mode and pure Nyquist modes) are dropped.
pub fn inv_laplacian(f: &ScalarField, calc: Calculus) -> ScalarField {
    inv_laplacian_spec(&Spectrum::of(f), calc).to_field()
}

fn inv_laplacian_spec(s: &Spectrum, calc: Calculus) -> Spectrum {
    let table = calc.table(s.grid());
    s.multiply(|k| {
        let l: f64 = k.iter().map(|&j| table[j] * table[j]).sum();
        if l > 1e-300 {
            Complex64::new(-1.0 / l, 0.0)
        } else {
            Complex64::default()
        }
    })
}

/// `∇Δ^{-1} g` without any precondition checks.
pub fn grad_inv_laplacian_with(g: &ScalarField, calc: Calculus) -> VectorField {
    let grid = *g.grid();
    let table = calc.table(&grid);
    let u = inv_laplacian_spec(&Spectrum::of(g), calc);
    let comps = (0..grid.d)
        .map(|a| u.multiply(|k| Complex64::new(0.0, table[k[a]])).to_field())
        .collect();
    VectorField::from_components(comps).expect("d components")
}

/// `Σ_{|α| ≤ k} ‖∂^α f‖_{L^p}` with spectral derivatives, each multi-index counted once.
pub fn sobolev_norm(f: &ScalarField, k: usize, p: f64) -> Result<f64, FieldError> {
    let grid = *f.grid();
    let mut total = f.lp_norm(p)?;
    if k == 0 {
        return Ok(total);
    }
    let table = Calculus::Spectral.table(&grid);
    let tables = vec![table; grid.d];
    let spec = Spectrum::of(f);
    for order in 1..=k {
        for powers in multi_indices(grid.d, order) {
            let g = spec.monomial(&tables, &powers).to_field();
            total += lp_of(g.values().iter().map(|v| v.abs()), g.values().len(), p)?;
        }
    }
    Ok(total)
}

/// All exponent tuples of length `d` summing to `order`.
fn multi_indices(d: usize, order: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![order]];
    }
    let mut out = Vec::new();
    for first in (0..=order).rev() {
        for mut rest in multi_indices(d - 1, order - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::apply_j;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn g(d: usize, n: usize) -> GridSpec {
        GridSpec::new(d, n, 2).unwrap()
    }

    /// Random real trigonometric polynomial with modes `|k_a| <= bw`.
    fn band_limited(grid: GridSpec, bw: i64, seed: u64) -> ScalarField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for _ in 0..12 {
            let k: Vec<f64> = (0..grid.d).map(|_| rng.gen_range(-bw..=bw) as f64).collect();
            terms.push((k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0)));
        }
        ScalarField::from_fn(grid, |x| {
            terms
                .iter()
                .map(|(k, a, ph)| {
                    let arg: f64 = k.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + ph;
                    a * (2.0 * PI * arg).cos()
                })
                .sum()
        })
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.values().iter().zip(b.values()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn gradient_of_sine() {
        let grid = g(2, 32);
        let f = ScalarField::from_fn(grid, |x| (2.0 * PI * x[0]).sin());
        let df = gradient(&f);
        let want = ScalarField::from_fn(grid, |x| 2.0 * PI * (2.0 * PI * x[0]).cos());
        assert!(max_diff(df.comp(0), &want) < 1e-12);
        assert!(df.comp(1).max_abs() < 1e-12);
        let f = ScalarField::from_fn(grid, |x| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin());
        let want = ScalarField::from_fn(grid, |x| 2.0 * PI * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin());
        assert!(max_diff(gradient(&f).comp(0), &want) < 1e-12);
        let c = ScalarField::constant(grid, 3.0);
        assert!(gradient(&c).max_abs() < 1e-14);
    }

    #[test]
    fn divergence_examples() {
        let grid = g(2, 32);
        let v = VectorField::from_components(vec![
            ScalarField::from_fn(grid, |x| (2.0 * PI * x[0]).sin()),
            ScalarField::zeros(grid),
        ])
        .unwrap();
        let want = ScalarField::from_fn(grid, |x| 2.0 * PI * (2.0 * PI * x[0]).cos());
        assert!(max_diff(&divergence(&v), &want) < 1e-12);
        let c = VectorField::constant(grid, &[1.0, -2.0]);
        assert!(divergence(&c).max_abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_fields_are_solenoidal() {
        for calc in [Calculus::Spectral, Calculus::Central] {
            let grid = g(4, 16);
            let h = band_limited(grid, 5, 7);
            let u = apply_j(&gradient_with(&h, calc)).unwrap();
            let div = divergence_with(&u, calc);
            assert!(div.max_abs() <= 1e-10 * u.max_abs() * 16.0);
        }
    }

    #[test]
    fn central_symbol_is_the_three_point_stencil() {
        let grid = g(2, 16);
        let f = band_limited(grid, 7, 3);
        let d1 = partial(&f, 1, Calculus::Central);
        let n = grid.n;
        let s = grid.stride(1);
        let want = ScalarField::from_vec(
            grid,
            (0..grid.len())
                .map(|i| {
                    let j = (i / s) % n;
                    let up = i - j * s + ((j + 1) % n) * s;
                    let dn = i - j * s + ((j + n - 1) % n) * s;
                    (f.values()[up] - f.values()[dn]) * n as f64 / 2.0
                })
                .collect(),
        )
        .unwrap();
        assert!(max_diff(&d1, &want) < 1e-11);
    }

    #[test]
    fn inverse_laplacian_single_mode() {
        let grid = g(2, 32);
        let f = ScalarField::from_fn(grid, |x| (2.0 * PI * x[0]).sin());
        let v = grad_inv_laplacian_with(&f, Calculus::Spectral);
        let want = ScalarField::from_fn(grid, |x| -(2.0 * PI * x[0]).cos() / (2.0 * PI));
        assert!(max_diff(v.comp(0), &want) < 1e-12);
        assert!(v.comp(1).max_abs() < 1e-14);
    }

    #[test]
    fn sobolev_examples() {
        let grid = g(2, 32);
        let c = ScalarField::constant(grid, 2.0);
        assert!((sobolev_norm(&c, 2, 2.0).unwrap() - 2.0).abs() < 1e-12);
        let s = ScalarField::from_fn(grid, |x| (2.0 * PI * x[0]).sin());
        let want = (1.0 + 2.0 * PI) / 2f64.sqrt();
        assert!((sobolev_norm(&s, 1, 2.0).unwrap() - want).abs() < 1e-10);
        assert_eq!(multi_indices(4, 2).len(), 10);
    }

    #[test]
    fn sobolev_gradient_term_scales_linearly() {
        let grid = g(2, 64);
        let lams = [1.0f64, 2.0, 4.0, 8.0];
        let pts: Vec<(f64, f64)> = lams
            .iter()
            .map(|&l| {
                let f = ScalarField::from_fn(grid, |x| (2.0 * PI * l * x[0]).sin() + 0.5 * (2.0 * PI * l * x[1]).cos());
                let w1 = sobolev_norm(&f, 1, 2.0).unwrap() - f.lp_norm(2.0).unwrap();
                (l.ln(), w1.ln())
            })
            .collect();
        let slope = crate::util::ls_slope(&pts);
        assert!((slope - 1.0).abs() < 1e-10, "slope {slope}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn parseval(seed in any::<u64>()) {
            let grid = g(2, 32);
            let f = band_limited(grid, 10, seed);
            let lhs = f.lp_norm(2.0).unwrap().powi(2);
            let rhs = Spectrum::of(&f).energy();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs);
        }

        #[test]
        fn div_grad_is_laplacian(seed in any::<u64>()) {
            let grid = g(2, 32);
            let f = band_limited(grid, 10, seed);
            let lap = Spectrum::of(&f)
                .multiply(|k| {
                    let s: f64 = k.iter().map(|&j| (2.0 * PI * grid.wavenumber(j) as f64).powi(2)).sum();
                    Complex64::new(-s, 0.0)
                })
                .to_field();
            let dg = divergence(&gradient(&f));
            prop_assert!(max_diff(&dg, &lap) <= 1e-10 * lap.max_abs());
        }

        #[test]
        fn divergence_has_zero_mean(seed in any::<u64>()) {
            let grid = g(2, 16);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let comps = (0..2).map(|_| ScalarField::from_fn(grid, |_| rng.gen_range(-1.0..1.0))).collect();
            let v = VectorField::from_components(comps).unwrap();
            prop_assert!(divergence(&v).mean().abs() <= 1e-12 * v.max_abs());
        }

        #[test]
        fn inverse_laplacian_inverts_on_zero_mean(seed in any::<u64>()) {
            let grid = g(2, 32);
            let mut f = band_limited(grid, 10, seed);
            let m = f.mean();
            f.add_constant(-m);
            let back = divergence(&grad_inv_laplacian_with(&f, Calculus::Spectral));
            prop_assert!(max_diff(&back, &f) <= 1e-10 * f.max_abs().max(1e-300));
        }
    }
}
