//! Integral curves of `u = J∇H` for a grid Hamiltonian, the Liouville pushforward check and
//! the `∫Hρ` decay report.
//!
//! `H` is evaluated through its trigonometric interpolant, so the integrated field is the
//! exact Hamiltonian field of a smooth periodic function and `H(γ(t))` is conserved by the
//! exact flow; RK4 then drifts at order `h^4`.

use crate::field::{apply_j, gradient, FieldError, GridSpec, ScalarField, Spectrum, TimeField};
use crate::scheme::{IterationState, Origin};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("step h = {h} exceeds the limit {limit} = 1/(4 |u|_inf n)")]
    StepTooLarge { h: f64, limit: f64 },
    #[error("no starting points")]
    EmptyStarts,
    #[error("bad argument: {0}")]
    BadArgument(String),
    #[error("initial density has negative value {0}")]
    NegativeDensity(f64),
    #[error("state does not come from the Hamiltonian-decay starting triple")]
    WrongInitializer,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `x mod 1` in `[0, 1)`; `rem_euclid` alone returns `1.0` for tiny negative inputs.
pub fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Relative coefficient floor for interpolants built from grid data; modes below it are
/// FFT roundoff and only cost evaluation time.
pub const INTERP_TOL: f64 = 1e-13;

/// Sparse real trigonometric interpolant `P(x) = Σ_k Re(ĉ_k e^{2πik·x})`.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    d: usize,
    n: usize,
    /// Wavenumbers in `[−n/2, n/2)`, stored flat `d` per mode.
    ks: Vec<i32>,
    cs: Vec<Complex64>,
}

impl TrigInterpolant {
    /// Keeps coefficients above `tol · max|ĉ|`; `tol = 0` keeps every nonzero mode.
    pub fn new(f: &ScalarField, tol: f64) -> Self {
        let g = *f.grid();
        let spec = Spectrum::of(f);
        let cmax = spec.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let mut idx = vec![0usize; g.d];
        let (mut ks, mut cs) = (Vec::new(), Vec::new());
        for (i, c) in spec.coeffs().iter().enumerate() {
            if c.norm() > tol * cmax && c.norm() > 0.0 {
                g.multi_index(i, &mut idx);
                ks.extend(idx.iter().map(|&j| g.wavenumber(j) as i32));
                cs.push(*c);
            }
        }
        Self { d: g.d, n: g.n, ks, cs }
    }

    pub fn modes(&self) -> usize {
        self.cs.len()
    }

    /// Per-axis tables `e^{2πijx_a}` for `j ∈ [−n/2, n/2]`, offset by `n/2`.
    fn tables(&self, x: &[f64]) -> Vec<Vec<Complex64>> {
        let h = (self.n / 2) as i32;
        x.iter()
            .map(|&xa| {
                let base = Complex64::from_polar(1.0, 2.0 * PI * xa);
                let mut t = vec![Complex64::new(1.0, 0.0); (2 * h + 1) as usize];
                for j in 1..=h {
                    let v = t[(h + j - 1) as usize] * base;
                    t[(h + j) as usize] = v;
                    t[(h - j) as usize] = v.conj();
                }
                t
            })
            .collect()
    }

    /// `P(x)` and `∇P(x)`.
    pub fn eval_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let tabs = self.tables(x);
        let h = (self.n / 2) as i32;
        let mut val = 0.0;
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (m, c) in self.cs.iter().enumerate() {
            let k = &self.ks[m * self.d..(m + 1) * self.d];
            let mut e = *c;
            for (a, &ka) in k.iter().enumerate() {
                e *= tabs[a][(ka + h) as usize];
            }
            val += e.re;
            // d/dx_a Re(c e^{2πik·x}) = Re(2πi k_a c e^{…}) = −2π k_a Im(c e^{…}).
            for (a, &ka) in k.iter().enumerate() {
                grad[a] -= 2.0 * PI * ka as f64 * e.im;
            }
        }
        val
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; self.d];
        self.eval_grad(x, &mut g)
    }

    /// `J∇P(x)`.
    pub fn velocity(&self, x: &[f64], out: &mut [f64]) {
        let mut g = vec![0.0; self.d];
        self.eval_grad(x, &mut g);
        let h = self.d / 2;
        for i in 0..self.d {
            out[i] = if i < h { g[i + h] } else { -g[i - h] };
        }
    }

    /// One classical RK4 step, wrapped to `[0,1)^d`.
    pub fn rk4_step(&self, x: &mut [f64], h: f64) {
        let d = self.d;
        let (mut k1, mut k2, mut k3, mut k4, mut y) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
        self.velocity(x, &mut k1);
        for a in 0..d {
            y[a] = x[a] + 0.5 * h * k1[a];
        }
        self.velocity(&y, &mut k2);
        for a in 0..d {
            y[a] = x[a] + 0.5 * h * k2[a];
        }
        self.velocity(&y, &mut k3);
        for a in 0..d {
            y[a] = x[a] + h * k3[a];
        }
        self.velocity(&y, &mut k4);
        for a in 0..d {
            x[a] = wrap(x[a] + h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]));
        }
    }
}

/// Sampled integral curves.
#[derive(Clone, Debug)]
pub struct CurveEnsemble {
    pub starts: Vec<Vec<f64>>,
    pub step: f64,
    pub times: Vec<f64>,
    /// `paths[c][j]` is curve `c` at `times[j]`, wrapped to `[0,1)^d`.
    pub paths: Vec<Vec<Vec<f64>>>,
    pub hamiltonian_trace: Vec<Vec<f64>>,
}

impl CurveEnsemble {
    /// `max_{c,t} |H(γ_c(t)) − H(γ_c(0))|`.
    pub fn max_drift(&self) -> f64 {
        self.hamiltonian_trace
            .iter()
            .flat_map(|tr| tr.iter().map(move |v| (v - tr[0]).abs()))
            .fold(0.0, f64::max)
    }
}

/// Grid sup of `|J∇H|` and the admissible step `1/(4|u|_∞ n)`.
pub fn step_limit(ham: &ScalarField) -> f64 {
    let u = apply_j(&gradient(ham)).expect("even dimension");
    let umax = u.magnitude().max_abs();
    if umax == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (4.0 * umax * ham.grid().n as f64)
    }
}

pub fn integrate_curves(ham: &ScalarField, starts: &[Vec<f64>], h: f64, t_end: f64) -> Result<CurveEnsemble, TrajectoryError> {
    integrate_with(&TrigInterpolant::new(ham, INTERP_TOL), step_limit(ham), starts, h, t_end)
}

/// As [`integrate_curves`] with a prebuilt (possibly truncated) interpolant.
pub fn integrate_with(
    interp: &TrigInterpolant,
    limit: f64,
    starts: &[Vec<f64>],
    h: f64,
    t_end: f64,
) -> Result<CurveEnsemble, TrajectoryError> {
    if starts.is_empty() {
        return Err(TrajectoryError::EmptyStarts);
    }
    if !(h > 0.0 && t_end >= 0.0) {
        return Err(TrajectoryError::BadArgument(format!("h = {h}, t_end = {t_end}")));
    }
    if h > limit {
        return Err(TrajectoryError::StepTooLarge { h, limit });
    }
    if starts.iter().any(|s| s.len() != interp.d) {
        return Err(TrajectoryError::BadArgument("start dimension mismatch".into()));
    }
    let steps = (t_end / h).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|j| j as f64 * h).collect();
    let mut paths = Vec::with_capacity(starts.len());
    let mut traces = Vec::with_capacity(starts.len());
    for s in starts {
        let mut x: Vec<f64> = s.iter().map(|&v| wrap(v)).collect();
        let mut path = vec![x.clone()];
        let mut trace = vec![interp.eval(&x)];
        for _ in 0..steps {
            interp.rk4_step(&mut x, h);
            path.push(x.clone());
            trace.push(interp.eval(&x));
        }
        paths.push(path);
        traces.push(trace);
    }
    Ok(CurveEnsemble { starts: starts.to_vec(), step: h, times, paths, hamiltonian_trace: traces })
}

/// Method-of-lines spectral solve of `∂_tρ + div(ρ J∇H) = 0`, RK4 in time with substeps
/// below the advective limit; returns `ρ` at the grid's time slices.
pub fn solve_transport(rho0: &ScalarField, ham: &ScalarField, grid: GridSpec) -> Result<TimeField<ScalarField>, TrajectoryError> {
    if !rho0.grid().same_space(&grid) || !ham.grid().same_space(&grid) {
        return Err(TrajectoryError::Field(FieldError::GridMismatch));
    }
    let u = apply_j(&gradient(ham)).expect("even dimension");
    let umax = u.magnitude().max_abs();
    let rhs = |r: &ScalarField| {
        let mut f = crate::field::divergence(&u.times_scalar(r));
        f.scale(-1.0);
        f
    };
    let dt = grid.dt();
    let sub = if umax == 0.0 { 1 } else { ((dt * umax * grid.n as f64 * 2.0).ceil() as usize).max(1) };
    let h = dt / sub as f64;
    let mut cur = rho0.clone();
    let mut out = vec![cur.clone()];
    for _ in 1..grid.n_t {
        for _ in 0..sub {
            let k1 = rhs(&cur);
            let mut y = cur.clone();
            y.axpy(0.5 * h, &k1);
            let k2 = rhs(&y);
            let mut y = cur.clone();
            y.axpy(0.5 * h, &k2);
            let k3 = rhs(&y);
            let mut y = cur.clone();
            y.axpy(h, &k3);
            let k4 = rhs(&y);
            cur.axpy(h / 6.0, &k1);
            cur.axpy(h / 3.0, &k2);
            cur.axpy(h / 3.0, &k3);
            cur.axpy(h / 6.0, &k4);
        }
        out.push(cur.clone());
    }
    Ok(TimeField::new(grid, out)?)
}

/// Particle-versus-density comparison.
#[derive(Clone, Debug)]
pub struct PushforwardReport {
    pub n_particles: usize,
    pub t: f64,
    pub bins: usize,
    /// Total-variation distance of binned marginals, per axis.
    pub tv: Vec<f64>,
    /// `|E e^{2πix_a} − ∫ρ e^{2πix_a}|` per axis (circular first moments).
    pub first_moment_err: Vec<f64>,
    /// `|E e^{2πi(x_a − x_b)} − ∫ρ e^{2πi(x_a − x_b)}|` maximized over axis pairs.
    pub second_moment_err: f64,
    pub acceptance_rate: f64,
}

impl PushforwardReport {
    pub fn tv_max(&self) -> f64 {
        self.tv.iter().copied().fold(0.0, f64::max)
    }
}

/// Exact bin masses of the marginal of the interpolant of `f` along `axis`.
fn marginal_bins(f: &ScalarField, axis: usize, bins: usize) -> Vec<f64> {
    let g = *f.grid();
    let spec = Spectrum::of(f);
    let mut idx = vec![0usize; g.d];
    let mut out = vec![0.0; bins];
    let total = spec.coeffs()[0].re;
    for (i, c) in spec.coeffs().iter().enumerate() {
        g.multi_index(i, &mut idx);
        if idx.iter().enumerate().any(|(a, &j)| a != axis && j != 0) {
            continue;
        }
        let k = g.wavenumber(idx[axis]) as f64;
        for (b, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (b as f64 / bins as f64, (b + 1) as f64 / bins as f64);
            *o += if k == 0.0 {
                c.re * (hi - lo)
            } else {
                let w = 2.0 * PI * k;
                let integral = (Complex64::new(0.0, w * hi).exp() - Complex64::new(0.0, w * lo).exp()) / Complex64::new(0.0, w);
                (c * integral).re
            };
        }
    }
    out.iter().map(|v| v / total).collect()
}

/// `∫ρ e^{2πik·x} / ∫ρ` for a wavevector `k`.
fn density_moment(spec: &Spectrum, k: &[i64]) -> Complex64 {
    let g = *spec.grid();
    let mut flat = 0;
    for a in (0..g.d).rev() {
        flat = flat * g.n + ((-k[a]).rem_euclid(g.n as i64)) as usize;
    }
    spec.coeffs()[flat] / spec.coeffs()[0].re
}

pub fn pushforward_check(
    rho: &TimeField<ScalarField>,
    ham: &ScalarField,
    n_particles: usize,
    t: f64,
    seed: u64,
) -> Result<PushforwardReport, TrajectoryError> {
    let g = *rho.grid();
    let j = (0..g.n_t)
        .find(|&j| (g.time(j) - t).abs() < 1e-9)
        .ok_or_else(|| TrajectoryError::BadArgument(format!("t = {t} is not a time slice")))?;
    let rho0 = rho.slice(0);
    let min = rho0.min();
    if min < 0.0 {
        return Err(TrajectoryError::NegativeDensity(min));
    }
    let d = g.d;
    let dens = TrigInterpolant::new(rho0, INTERP_TOL);
    let envelope = 1.25 * rho0.max_abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut particles = Vec::with_capacity(n_particles);
    let mut proposals = 0usize;
    while particles.len() < n_particles {
        proposals += 1;
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let v = dens.eval(&x);
        if v > envelope {
            return Err(TrajectoryError::BadArgument("interpolant exceeds the rejection envelope".into()));
        }
        if rng.gen::<f64>() * envelope < v {
            particles.push(x);
        }
    }
    let interp = TrigInterpolant::new(ham, INTERP_TOL);
    let limit = step_limit(ham);
    let steps = if t == 0.0 { 0 } else { ((t / limit.min(t)).ceil() as usize).max(1) };
    let h = if steps == 0 { 0.0 } else { t / steps as f64 };
    for x in particles.iter_mut() {
        for _ in 0..steps {
            interp.rk4_step(x, h);
        }
    }
    let bins = (g.n / 4).max(1);
    let target = rho.slice(j);
    let spec = Spectrum::of(target);
    let np = n_particles as f64;
    let mut tv = Vec::new();
    let mut first = Vec::new();
    for a in 0..d {
        let q = marginal_bins(target, a, bins);
        let mut p = vec![0.0; bins];
        for x in &particles {
            p[((x[a] * bins as f64) as usize).min(bins - 1)] += 1.0 / np;
        }
        tv.push(0.5 * p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>());
        let emp: Complex64 = particles.iter().map(|x| Complex64::from_polar(1.0, 2.0 * PI * x[a])).sum::<Complex64>() / np;
        let mut k = vec![0i64; d];
        k[a] = 1;
        first.push((emp - density_moment(&spec, &k)).norm());
    }
    let mut second: f64 = 0.0;
    for a in 0..d {
        for b in a + 1..d {
            let emp: Complex64 =
                particles.iter().map(|x| Complex64::from_polar(1.0, 2.0 * PI * (x[a] - x[b]))).sum::<Complex64>() / np;
            let mut k = vec![0i64; d];
            k[a] = 1;
            k[b] = -1;
            second = second.max((emp - density_moment(&spec, &k)).norm());
        }
    }
    Ok(PushforwardReport {
        n_particles,
        t,
        bins,
        tv,
        first_moment_err: first,
        second_moment_err: second,
        acceptance_rate: n_particles as f64 / proposals as f64,
    })
}

/// `∫H_q ρ_q(0,·)` and `∫H_q ρ_q(1,·)` for one stage.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayRow {
    pub q: usize,
    pub at_start: f64,
    pub at_end: f64,
}

impl DecayRow {
    pub fn gap(&self) -> f64 {
        self.at_start - self.at_end
    }
}

/// Stage-0 bound chain: the gap must dominate `2/λ_0 + 8Δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayBounds {
    pub lambda0: usize,
    pub delta: f64,
    /// `1 − ∫H̄_0(λx_1)ψ̄_0(λx_1)`.
    pub gap0: f64,
    pub two_over_lambda: f64,
    pub eight_delta: f64,
}

impl DecayBounds {
    /// `1 > 2/λ_0 + 8Δ`.
    pub fn unit_bound_holds(&self) -> bool {
        1.0 > self.two_over_lambda + self.eight_delta
    }

    /// `1 − Δ > 2/λ_0 + 8Δ`.
    pub fn gap_bound_holds(&self) -> bool {
        1.0 - self.delta > self.two_over_lambda + self.eight_delta
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    pub bounds: DecayBounds,
}

pub fn hamiltonian_decay_report(states: &[IterationState]) -> Result<DecayReport, TrajectoryError> {
    let first = states.first().ok_or_else(|| TrajectoryError::BadArgument("no states".into()))?;
    let Origin::Hamil { lambda, profiles } = &first.origin else {
        return Err(TrajectoryError::WrongInitializer);
    };
    let mut rows = Vec::new();
    for s in states {
        if !matches!(s.origin, Origin::Hamil { .. }) {
            return Err(TrajectoryError::WrongInitializer);
        }
        let g = s.grid;
        if (g.t_end - 1.0).abs() > 1e-12 {
            return Err(TrajectoryError::BadArgument("time horizon must be [0, 1]".into()));
        }
        rows.push(DecayRow {
            q: s.q,
            at_start: s.ham.integral_product(s.rho.slice(0)),
            at_end: s.ham.integral_product(s.rho.slice(g.n_t - 1)),
        });
    }
    let l = *lambda as f64;
    let prod = first.ham.zip_map(first.rho.slice(first.grid.n_t - 1), |h, r| h * r).mean();
    let bounds = DecayBounds {
        lambda0: *lambda,
        delta: profiles.delta,
        gap0: 1.0 - prod,
        two_over_lambda: 2.0 / l,
        eight_delta: 8.0 * profiles.delta,
    };
    Ok(DecayReport { rows, bounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{initial_triple_hamil, initial_triple_tce};

    fn g2(n: usize) -> GridSpec {
        GridSpec::new(2, n, 2).unwrap()
    }

    fn smooth_h(g: GridSpec) -> ScalarField {
        ScalarField::from_fn(g, |x| {
            ((2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin() + 0.3 * (2.0 * PI * (x[0] + 2.0 * x[1])).cos()) / (2.0 * PI)
        })
    }

    #[test]
    fn interpolant_matches_grid_and_gradient() {
        let g = g2(16);
        let h = smooth_h(g);
        let it = TrigInterpolant::new(&h, 0.0);
        let mut x = vec![0.0; 2];
        for i in [0, 17, 100, 255] {
            g.point(i, &mut x);
            assert!((it.eval(&x) - h.values()[i]).abs() < 1e-13);
        }
        let x = [0.3217, 0.7731];
        let mut gr = [0.0; 2];
        it.eval_grad(&x, &mut gr);
        let e = 1e-6;
        let fd0 = (it.eval(&[x[0] + e, x[1]]) - it.eval(&[x[0] - e, x[1]])) / (2.0 * e);
        assert!((fd0 - gr[0]).abs() < 1e-7);
    }

    #[test]
    fn wrap_stays_below_one() {
        assert_eq!(wrap(-1e-18), 0.0);
        assert_eq!(wrap(1.0), 0.0);
        assert_eq!(wrap(-0.25), 0.75);
    }

    #[test]
    fn zero_field_is_stationary() {
        let g = g2(8);
        let c = integrate_curves(&ScalarField::zeros(g), &[vec![0.1, 0.2], vec![0.5, 0.9]], 0.1, 1.0).unwrap();
        for p in &c.paths {
            assert!(p.iter().all(|x| x == &p[0]));
        }
    }

    #[test]
    fn vertical_lines_for_cosine() {
        let g = g2(16);
        let h = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).cos());
        let c = integrate_curves(&h, &[vec![0.13, 0.4], vec![0.61, 0.05]], 1e-3, 0.2).unwrap();
        for (p, tr) in c.paths.iter().zip(&c.hamiltonian_trace) {
            for (x, v) in p.iter().zip(tr) {
                assert!((x[0] - p[0][0]).abs() <= 1e-12);
                assert!((v - tr[0]).abs() <= 1e-12);
            }
            assert!(p.last().unwrap()[1] != p[0][1]);
        }
    }

    #[test]
    fn step_limit_and_empty_starts() {
        let g = g2(16);
        let h = smooth_h(g);
        assert!(matches!(integrate_curves(&h, &[vec![0.0, 0.0]], 1.0, 1.0), Err(TrajectoryError::StepTooLarge { .. })));
        assert!(matches!(integrate_curves(&h, &[], 1e-3, 1.0), Err(TrajectoryError::EmptyStarts)));
    }

    #[test]
    fn rk4_order_and_periodicity() {
        let g = g2(16);
        let h = smooth_h(g);
        let starts = vec![vec![0.11, 0.27], vec![0.73, 0.41]];
        let drift = |step: f64| integrate_curves(&h, &starts, step, 1.0).unwrap().max_drift();
        let (d1, d2) = (drift(0.008), drift(0.004));
        let ratio = d1 / d2;
        assert!(ratio > 8.0 && ratio < 24.0, "{d1} {d2} {ratio}");
        let a = integrate_curves(&h, &[vec![0.11, 0.27]], 0.005, 0.5).unwrap();
        let b = integrate_curves(&h, &[vec![1.11, -0.73]], 0.005, 0.5).unwrap();
        for (x, y) in a.paths[0].iter().zip(&b.paths[0]) {
            for k in 0..2 {
                let dd = (x[k] - y[k]).abs();
                assert!(dd.min(1.0 - dd) <= 1e-12);
            }
        }
    }

    #[test]
    fn uniform_stays_uniform() {
        let g = GridSpec::with_t_end(2, 32, 3, 0.5).unwrap();
        let h = smooth_h(g);
        let rho = TimeField::from_fn(g, |_, _| ScalarField::constant(g, 1.0)).unwrap();
        let n = 20_000;
        let rep = pushforward_check(&rho, &h, n, 0.5, 5).unwrap();
        assert!(rep.tv_max() <= 3.0 / (n as f64).sqrt(), "{rep:?}");
    }

    #[test]
    fn density_outside_field_support_is_unchanged() {
        let g = GridSpec::with_t_end(2, 32, 3, 0.5).unwrap();
        // H depends on x_2 only and vanishes for x_2 in [0.5, 1); the field J∇H = (∂_2H, 0)
        // is then zero on that strip, where the density lives.
        let bump = |y: f64| crate::profiles::bump(4.0 * y - 1.0);
        let h = ScalarField::from_fn(g, |x| bump(x[1]));
        let rho0 = ScalarField::from_fn(g, |x| bump(x[1] - 0.5));
        let rho = solve_transport(&rho0, &h, g).unwrap();
        let mut diff = rho.slice(2).clone();
        diff.axpy(-1.0, &rho0);
        assert!(diff.max_abs() <= 1e-10, "{}", diff.max_abs());
    }

    #[test]
    fn pushforward_matches_transport() {
        let g = GridSpec::with_t_end(2, 32, 3, 0.5).unwrap();
        let h = smooth_h(g);
        let rho0 = ScalarField::from_fn(g, |x| 1.0 + 0.6 * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin());
        let rho = solve_transport(&rho0, &h, g).unwrap();
        assert!(matches!(
            pushforward_check(&TimeField::from_fn(g, |_, _| rho0.map(|v| v - 2.0)).unwrap(), &h, 10, 0.5, 1),
            Err(TrajectoryError::NegativeDensity(_))
        ));
        let rep = pushforward_check(&rho, &h, 20_000, 0.5, 11).unwrap();
        assert!(rep.tv_max() <= 0.05, "{rep:?}");
        assert!(rep.first_moment_err.iter().all(|e| *e < 0.03), "{rep:?}");
    }

    #[test]
    fn decay_report_stage_zero() {
        let g = GridSpec::new(2, 256, 5).unwrap();
        let s = initial_triple_hamil(g, 40, 1.0 / 32.0).unwrap();
        let rep = hamiltonian_decay_report(std::slice::from_ref(&s)).unwrap();
        let row = &rep.rows[0];
        assert!((row.at_start - 1.0).abs() < 1e-8);
        assert!((row.at_end - 1.0 / 32.0).abs() < 1e-8);
        assert!((row.gap() - (1.0 - 1.0 / 32.0)).abs() < 1e-8);
        assert!(rep.bounds.unit_bound_holds());
        assert!(rep.bounds.gap_bound_holds());
        let tce = initial_triple_tce(g, 4).unwrap();
        assert!(matches!(hamiltonian_decay_report(&[tce]), Err(TrajectoryError::WrongInitializer)));
    }
}
