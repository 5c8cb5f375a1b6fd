//! Verification suites shared by the command-line tool and the acceptance harness. Each
//! suite returns named pass/fail lines with the measured value and its threshold.

use crate::antidiv::{improved_antidivergence, improved_holder_gap, AntidivError};
use crate::blocks::{measure_scaling, verify_block_lemma, BlockError, BlockFamily};
use crate::field::{Calculus, GridSpec, ScalarField, TimeField};
use crate::geometry::{build_direction_set, decompose, frame_is_exact, reconstruct, GeometryError, Rational};
use crate::io::{InitKind, RunConfig};
use crate::profiles::{chi, eval_psi, Phi, ProfileError};
use crate::scheme::{
    initial_triple_hamil, initial_triple_tce, iterate, make_schedule, IterationState, Mode, Overrides, SchemeError,
};
use crate::trajectories::{
    hamiltonian_decay_report, integrate_with, pushforward_check, solve_transport, step_limit, TrajectoryError,
    TrigInterpolant, INTERP_TOL,
};
use crate::util::loglog_slope;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Antidiv(#[from] AntidivError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

/// One hard assertion.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    /// `value ≤ bound`; NaN fails.
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), pass: value <= bound, detail: format!("{value:.3e} <= {bound:.1e}") }
    }

    /// `|value − target| ≤ tol`.
    pub fn near(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            pass: (value - target).abs() <= tol,
            detail: format!("{value:.9} vs {target:.9}, |diff| {:.2e} <= {tol:.1e}", (value - target).abs()),
        }
    }

    pub fn flag(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }

    pub fn runtime(elapsed: Duration, budget: Duration) -> Self {
        Self {
            name: "runtime".into(),
            pass: elapsed <= budget,
            detail: format!("{:.4} s <= {} s", elapsed.as_secs_f64(), budget.as_secs_f64()),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", if self.pass { "pass" } else { "FAIL" }, self.name, self.detail)
    }
}

/// A titled list of checks.
#[derive(Clone, Debug, Default)]
pub struct Suite {
    pub title: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Suite {
    pub fn new(title: &str) -> Self {
        Self { title: title.into(), ..Default::default() }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    /// Closes the suite with a runtime check.
    pub fn timed(mut self, start: Instant, budget: Duration) -> Self {
        self.push(Check::runtime(start.elapsed(), budget));
        self
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for n in &self.notes {
            writeln!(f, "  {n}")?;
        }
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        Ok(())
    }
}

/// Uniform random unit vector by rejection from the cube.
fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Decomposition of random unit vectors, nonnegativity, exact frames.
pub fn geometry_suite(samples: usize, seed: u64) -> Result<Suite, CheckError> {
    let start = Instant::now();
    let mut s = Suite::new("geometric lemma (d = 4)");
    let ds = build_direction_set(4, 0.125)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut min_coef) = (0.0f64, f64::INFINITY);
    for _ in 0..samples {
        let r = random_unit(&mut rng, 4);
        let a = decompose(&ds, &r)?;
        min_coef = min_coef.min(a.iter().copied().fold(f64::INFINITY, f64::min));
        let back = reconstruct(&ds, &a);
        worst = worst.max(back.iter().zip(&r).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt());
    }
    s.note(format!("{samples} random unit vectors, seed {seed}"));
    s.push(Check::at_most("reconstruction error", worst, 1e-12));
    s.push(Check::flag("coefficients nonnegative", min_coef >= 0.0, format!("min {min_coef:.3e}")));
    let orthonormal = ds.directions.iter().all(|dir| {
        dir.frame.iter().enumerate().all(|(i, u)| {
            dir.frame.iter().enumerate().all(|(j, v)| {
                let dot: Rational = u.iter().zip(v).map(|(a, b)| a * b).sum();
                dot == Rational::from_integer(i64::from(i == j))
            })
        })
    });
    s.push(Check::flag("frames orthonormal (exact)", orthonormal, format!("{} frames", ds.len())));
    let jperp = ds.directions.iter().all(frame_is_exact);
    s.push(Check::flag("J xi_perp = xi (exact)", jperp, format!("{} directions", ds.len())));
    Ok(s.timed(start, Duration::from_secs(1)))
}

/// Block identities at `n = 64`, `μ = 4`, `σ = 1`, `p = 2`, `ρ = 1/8` in `d = 4`.
pub fn blocks_suite() -> Result<Suite, CheckError> {
    let start = Instant::now();
    let mut s = Suite::new("building-block identities (d = 4, n = 64, mu = 4)");
    let ds = build_direction_set(4, 0.125)?;
    let bf = BlockFamily::build(&ds, 4.0, 1.0, 2.0, GridSpec::new(4, 64, 2)?, Calculus::Central)?;
    let r = verify_block_lemma(&bf);
    let t = r.tolerances;
    let worst = |f: fn(&crate::blocks::DirectionCheck) -> f64| r.directions.iter().map(f).fold(0.0, f64::max);
    s.push(Check::at_most("div X (rel)", worst(|c| c.div_x), t.div_x));
    s.push(Check::at_most("div(X Theta) (rel)", worst(|c| c.div_x_theta), t.div_x_theta));
    s.push(Check::at_most("|mean X|", worst(|c| c.mean_x), t.mean_x));
    s.push(Check::at_most("mean(X Theta) - sigma xi (rel)", worst(|c| c.flux), t.flux));
    let overlap = r.overlaps.iter().fold(0.0f64, |m, o| m.max(o.2).max(o.3));
    s.push(Check::flag(
        "cross-support overlaps exactly 0",
        r.overlaps_vanish(),
        format!("{} pairs, largest {overlap:e}", r.overlaps.len()),
    ));
    s.push(Check::flag("sampled cylinder disjointness", r.disjoint.pass, format!("mu = {}", r.disjoint.mu)));
    Ok(s.timed(start, Duration::from_secs(120)))
}

/// Fitted `log μ` slopes for `μ ∈ {4, 8, 16}` at 512 transverse points per axis.
pub fn scaling_suite() -> Result<Suite, CheckError> {
    let start = Instant::now();
    let mut s = Suite::new("scaling laws (mu in {4, 8, 16}, transverse n = 512)");
    let ds = build_direction_set(4, 0.125)?;
    let p = 2.0;
    let pp = crate::blocks::dual_exponent(p);
    for (k, sx, label) in [(0, 1.0, "(0,1)"), (0, p, "(0,p)"), (0, pp, "(0,p')"), (1, p, "(1,p)")] {
        for fit in measure_scaling(&ds, 1.0, p, sx, k, &[4.0, 8.0, 16.0], 512)? {
            s.push(Check::near(&format!("{} slope {label}", fit.field.name()), fit.slope, fit.predicted, 0.1));
        }
    }
    Ok(s.timed(start, Duration::from_secs(120)))
}

fn trig(c: &[f64], x: &[f64]) -> f64 {
    const MODES: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, -1.0)];
    MODES
        .iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let t = 2.0 * PI * (a * x[0] + b * x[1]);
            c[2 * i] * t.cos() + c[2 * i + 1] * t.sin()
        })
        .sum()
}

/// Improved anti-divergence on random smooth pairs in `d = 2`.
pub fn antidiv_suite(cases: usize, seed: u64) -> Result<Suite, CheckError> {
    let start = Instant::now();
    let mut s = Suite::new("anti-divergence (d = 2, n = 256)");
    let g = GridSpec::new(2, 256, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut worst_slope, mut min_slack) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut mean_ok = true;
    let lams = [4usize, 8, 16, 32];
    for case in 0..cases {
        let cf: Vec<f64> = (0..8).map(|_| rng.gen_range(-0.4..0.4)).collect();
        let cg: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = ScalarField::from_fn(g, |x| 1.0 + trig(&cf, x));
        let gg = ScalarField::from_fn(g, |x| trig(&cg, x));
        let lambda = rng.gen_range(1..=32usize);
        worst = worst.max(improved_antidivergence(&f, &gg, lambda)?.residual);
        // The decay and Hölder checks use the first few pairs of the same family.
        if case < 4 {
            let norms = lams
                .iter()
                .map(|&l| Ok(improved_antidivergence(&f, &gg, l)?.field.lp_norm(2.0)?))
                .collect::<Result<Vec<f64>, CheckError>>()?;
            let xs: Vec<f64> = lams.iter().map(|&l| l as f64).collect();
            let slope = loglog_slope(&xs, &norms);
            if (slope + 1.0).abs() > (worst_slope + 1.0).abs() || case == 0 {
                worst_slope = slope;
            }
            for &l in &lams {
                let h = improved_holder_gap(&f, &gg, l, 2.0, 1.0)?;
                min_slack = min_slack.min(h.slack);
                mean_ok &= h.mean_lhs <= h.mean_rhs;
            }
        }
    }
    s.note(format!("{cases} random pairs, lambda in 1..=32, seed {seed}"));
    s.push(Check::at_most("divergence identity residual", worst, 1e-8));
    s.push(Check::near("worst ||R(f g_lambda)||_2 slope", worst_slope, -1.0, 0.15));
    s.push(Check::flag("improved Hoelder slack >= 0 (C = 1)", min_slack >= 0.0, format!("min slack {min_slack:.3e}")));
    s.push(Check::flag("mean-interaction bound", mean_ok, "|int f g_lambda| - |int f||int g| <= sqrt(d)|f|_C1 |g|_1 / lambda"));
    Ok(s.timed(start, Duration::from_secs(30)))
}

/// Partition of unity, profile masses, and the linear core of `ψ`.
pub fn profile_suite(samples: usize, seed: u64) -> Result<Suite, CheckError> {
    let start = Instant::now();
    let mut s = Suite::new("partition and profiles");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let tau: f64 = rng.gen_range(-100.0..100.0);
        let base = tau.floor() as i64;
        let sum: f64 = (base - 3..=base + 3).map(|n| chi(tau - n as f64)).sum();
        worst = worst.max((sum - 1.0).abs());
    }
    s.push(Check::at_most("|sum chi(tau - n) - 1|", worst, 1e-12));
    // Cartesian midpoint sums over the cube [−2ρ, 2ρ]^3: both integrands are smooth and
    // compactly supported, so the sums converge faster than any power of the spacing.
    let rho = 0.125;
    let phi = Phi::new(rho, 3)?;
    let m = 160usize;
    let h = 4.0 * rho / m as f64;
    let (mut mass, mut psi_int) = (0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let x = [
                    -2.0 * rho + (i as f64 + 0.5) * h,
                    -2.0 * rho + (j as f64 + 0.5) * h,
                    -2.0 * rho + (k as f64 + 0.5) * h,
                ];
                mass += phi.eval(&x);
                psi_int += eval_psi(&x, rho)?;
            }
        }
    }
    let cell = h.powi(3);
    s.push(Check::near("int phi", mass * cell, 1.0, 1e-8));
    s.push(Check::at_most("|int psi|", (psi_int * cell).abs(), 1e-12));
    let e = 1e-5;
    let mut slope_err = 0.0f64;
    for _ in 0..200 {
        let mut x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r = rng.gen_range(0.0..0.5) * rho;
        x.iter_mut().for_each(|v| *v *= r / n.max(1e-12));
        for k in 0..3 {
            let (mut a, mut b) = (x.clone(), x.clone());
            a[k] += e;
            b[k] -= e;
            let fd = (eval_psi(&a, rho)? - eval_psi(&b, rho)?) / (2.0 * e);
            slope_err = slope_err.max((fd - if k == 0 { 1.0 } else { 0.0 }).abs());
        }
    }
    s.push(Check::at_most("psi slope on B_(rho/2)", slope_err, 1e-8));
    Ok(s.timed(start, Duration::from_secs(10)))
}

/// Schedule arithmetic in paper mode.
pub fn schedule_suite() -> Suite {
    let start = Instant::now();
    let mut s = Suite::new("schedule arithmetic (paper mode)");
    match make_schedule(2.0, 1.0, 4, 2.0, Mode::Paper, Overrides::default()) {
        Ok(sc) => {
            s.push(Check::flag("gamma = 3", sc.gamma == 3.0, format!("{}", sc.gamma)));
            s.push(Check::flag("alpha = 19", sc.alpha == 19.0, format!("{}", sc.alpha)));
            s.push(Check::flag("b = 724", sc.b == 724.0, format!("{}", sc.b)));
            let want = 1.0 / (2.0 * 724.0 * 725.0);
            s.push(Check::flag("beta = 1/(2*724*725)", sc.beta == want, format!("{:e} vs {want:e}", sc.beta)));
        }
        Err(e) => s.push(Check::flag("schedule built", false, e.to_string())),
    }
    let rejected = matches!(
        make_schedule(2.0, 3.0, 4, 2.0, Mode::Paper, Overrides::default()),
        Err(SchemeError::ExponentHypothesisViolated { .. })
    );
    s.push(Check::flag("(p, r, d) = (2, 3, 4) rejected", rejected, "exponent hypothesis"));
    s.timed(start, Duration::from_millis(1))
}

/// Starting triple and all stages of a run.
pub fn run_stages(cfg: &RunConfig) -> Result<Vec<IterationState>, CheckError> {
    let schedule = cfg.schedule()?;
    let ds = build_direction_set(cfg.grid.d, cfg.rho)?;
    let s0 = match cfg.init {
        InitKind::Tce => initial_triple_tce(cfg.grid, cfg.lambda0())?,
        InitKind::Hamil => initial_triple_hamil(cfg.grid, cfg.lambda0(), cfg.delta.unwrap_or_else(|| schedule.delta_sum()))?,
    };
    let mut states = vec![s0];
    for _ in 0..cfg.stages {
        let next = iterate(states.last().expect("nonempty"), &schedule, &ds)?;
        states.push(next);
    }
    Ok(states)
}

/// Hard assertions on every stage of a run, with the config tolerances.
pub fn structural_checks(cfg: &RunConfig, states: &[IterationState]) -> Suite {
    let t = &cfg.tolerances;
    let mut s = Suite::new("iteration structure");
    s.push(Check::at_most("stage 0 residual (rel)", states[0].residual().relative(), t.residual));
    for st in &states[1..] {
        let d = st.diagnostics.last().expect("diagnostics per stage");
        let q = d.stage;
        s.push(Check::at_most(&format!("stage {q} residual (rel)"), d.residual, t.residual));
        s.push(Check::at_most(&format!("stage {q} mass drift"), d.mass_drift, t.mass));
        s.push(Check::flag(&format!("stage {q} theta_p >= 0"), d.theta_p_min >= 0.0, format!("min {:e}", d.theta_p_min)));
        s.push(Check::at_most(&format!("stage {q} mean of theta_p + theta_c"), d.mean_zero, t.mean_zero));
        let name = format!("stage {q} cutoff window (t <= {:.4} - ell)", d.window_t0);
        if d.window_t0.is_nan() {
            s.push(Check::flag(&name, true, "input has no constant window; nothing to preserve"));
        } else if d.window_t0 - d.ell < 0.0 {
            s.push(Check::flag(&name, true, format!("empty: t0 - ell = {:.4} < 0", d.window_t0 - d.ell)));
        } else {
            s.push(Check::at_most(&name, d.cutoff_window, t.window));
        }
        s.push(Check::at_most(&format!("stage {q} u = J grad H (rel)"), d.u_identity, t.u_identity));
        if cfg.target_decrease > 0.0 {
            s.push(Check::flag(
                &format!("stage {q} decrease ||R_prev||/||R|| >= {}", cfg.target_decrease),
                d.l1_r * cfg.target_decrease <= d.l1_r_prev,
                format!("{:.4e} / {:.4e} = {:.3}", d.l1_r_prev, d.l1_r, d.l1_r_prev / d.l1_r),
            ));
        }
    }
    s
}

/// RK4 order on a stage Hamiltonian: maximal `H` drift over a few curves for `h`, `h/2`, `h/4`.
pub fn rk4_order(ham: &ScalarField, t_end: f64, curves: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>), CheckError> {
    let d = ham.grid().d;
    let interp = TrigInterpolant::new(ham, INTERP_TOL);
    let limit = step_limit(ham);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..curves).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
    let h0 = if limit.is_finite() { t_end / (t_end / limit).ceil() } else { t_end / 8.0 };
    let steps = [h0, h0 / 2.0, h0 / 4.0];
    let drifts = steps
        .iter()
        .map(|&h| Ok(integrate_with(&interp, limit, &starts, h, t_end)?.max_drift()))
        .collect::<Result<Vec<_>, CheckError>>()?;
    Ok((steps.to_vec(), drifts))
}

/// Smooth `d = 2` Hamiltonian and density for the pushforward comparison.
pub fn pushforward_fixture(n: usize) -> Result<(ScalarField, TimeField<ScalarField>), CheckError> {
    let g = GridSpec::with_t_end(2, n, 3, 0.5)?;
    let ham = ScalarField::from_fn(g, |x| {
        ((2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin() + 0.3 * (2.0 * PI * (x[0] + 2.0 * x[1])).cos()) / (2.0 * PI)
    });
    let rho0 = ScalarField::from_fn(g, |x| 1.0 + 0.6 * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin());
    let rho = solve_transport(&rho0, &ham, g)?;
    Ok((ham, rho))
}

/// RK4 order on `ham`, pushforward at `10^5` particles, and the stage-0 decay gap.
pub fn trajectory_suite(ham: &ScalarField, seed: u64) -> Result<Suite, CheckError> {
    let start = Instant::now();
    let mut s = Suite::new("trajectories");
    let (steps, drifts) = rk4_order(ham, 0.05, 4, seed)?;
    s.note(format!(
        "H drift over t in [0, 0.05]: h = {:.3e} -> {:.3e}, h/2 -> {:.3e}, h/4 -> {:.3e}",
        steps[0], drifts[0], drifts[1], drifts[2]
    ));
    for (i, w) in drifts.windows(2).enumerate() {
        s.push(Check::near(&format!("drift ratio h/{} -> h/{}", 1 << i, 2 << i), w[0] / w[1], 16.0, 8.0));
    }
    let (pham, rho) = pushforward_fixture(64)?;
    let rep = pushforward_check(&rho, &pham, 100_000, 0.5, seed)?;
    s.note(format!(
        "pushforward (d = 2, n = 64, t = 1/2): TV per axis {:?}, circular first-moment errors {:?}",
        rep.tv.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
        rep.first_moment_err.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
    ));
    s.push(Check::at_most("pushforward TV at 1e5 particles", rep.tv_max(), 0.05));
    let g = GridSpec::new(2, 256, 5)?;
    let s0 = initial_triple_hamil(g, 40, 1.0 / 32.0)?;
    let decay = hamiltonian_decay_report(std::slice::from_ref(&s0))?;
    let row = &decay.rows[0];
    s.push(Check::near("stage-0 gap int H rho(0) - int H rho(1)", row.gap(), 1.0 - 1.0 / 32.0, 1e-6));
    let b = &decay.bounds;
    s.push(Check::flag(
        "1 > 2/lambda0 + 8 Delta (lambda0 = 40, Delta = 1/32)",
        b.unit_bound_holds(),
        format!("2/lambda0 + 8 Delta = {:.4}", b.two_over_lambda + b.eight_delta),
    ));
    s.push(Check::flag(
        "1 - Delta > 2/lambda0 + 8 Delta",
        b.gap_bound_holds(),
        format!("{:.4} > {:.4}", 1.0 - b.delta, b.two_over_lambda + b.eight_delta),
    ));
    Ok(s.timed(start, Duration::from_secs(300)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suites_pass() {
        for s in [geometry_suite(500, 1).unwrap(), schedule_suite(), profile_suite(1000, 2).unwrap()] {
            assert!(s.checks.iter().filter(|c| c.name != "runtime").all(|c| c.pass), "{s}");
        }
    }

    #[test]
    fn check_formatting_and_nan() {
        let c = Check::at_most("x", f64::NAN, 1.0);
        assert!(!c.pass);
        assert!(Check::near("y", 1.0, 1.05, 0.1).pass);
        assert!(!Suite::new("empty").pass());
        assert!(format!("{}", Check::flag("z", true, "ok")).starts_with("[pass] z"));
    }

    #[test]
    fn rk4_order_on_smooth_field() {
        let (ham, _) = pushforward_fixture(16).unwrap();
        let (_, d) = rk4_order(&ham, 1.0, 3, 4).unwrap();
        assert!((d[0] / d[1] - 16.0).abs() <= 8.0, "{d:?}");
    }
}
