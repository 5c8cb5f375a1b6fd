//! Parameter schedule: the exponents `γ, α, b, β` and the per-stage frequencies.

use super::SchemeError;
use crate::blocks::dual_exponent;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// All constants derived from `(p, r, d)` by the closed formulas.
    Paper,
    /// `b, β, α, γ` supplied by the user; only the exponent hypothesis is enforced.
    Tame,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Paper => "paper",
            Mode::Tame => "tame",
        }
    }
}

/// User overrides, consumed in tame mode.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub b: Option<f64>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
}

impl Overrides {
    fn is_empty(&self) -> bool {
        self.b.is_none() && self.beta.is_none() && self.alpha.is_none() && self.gamma.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamSchedule {
    pub p: f64,
    pub p_prime: f64,
    pub r: f64,
    pub d: usize,
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub mode: Mode,
    /// Non-fatal notes, e.g. floating-point overflow of `λ_1` in paper mode.
    pub warnings: Vec<String>,
}

/// `1/p + 1/r > 1 + 1/(d−1)`.
pub fn exponent_hypothesis(p: f64, r: f64, d: usize) -> bool {
    d >= 2 && 1.0 / p + 1.0 / r > 1.0 + 1.0 / (d as f64 - 1.0)
}

/// `γ = (1 + 1/p) / min{(d−1)/p, (d−1)/p′, −1 − (d−1)(1/p′ − 1/r)}`.
pub fn gamma_of(p: f64, r: f64, d: usize) -> f64 {
    let dm = d as f64 - 1.0;
    let pp = dual_exponent(p);
    let m = (dm / p).min(dm / pp).min(-1.0 - dm * (1.0 / pp - 1.0 / r));
    (1.0 + 1.0 / p) / m
}

pub fn make_schedule(p: f64, r: f64, d: usize, a: f64, mode: Mode, overrides: Overrides) -> Result<ParamSchedule, SchemeError> {
    if !(p > 1.0 && p.is_finite() && r >= 1.0 && r.is_finite()) {
        return Err(SchemeError::BadParameter(format!("exponents p = {p}, r = {r} must satisfy p > 1, r >= 1")));
    }
    if !exponent_hypothesis(p, r, d) {
        return Err(SchemeError::ExponentHypothesisViolated { p, r, d });
    }
    if !(a > 1.0 && a.is_finite()) {
        return Err(SchemeError::BadParameter(format!("base a = {a} must exceed 1")));
    }
    let p_prime = dual_exponent(p);
    let mut warnings = Vec::new();
    let (b, beta, alpha, gamma) = match mode {
        Mode::Paper => {
            if !overrides.is_empty() {
                return Err(SchemeError::BadParameter("overrides are only accepted in tame mode".into()));
            }
            let gamma = gamma_of(p, r, d);
            let alpha = 4.0 + gamma * (d as f64 + 1.0);
            let b = p.max(p_prime) * (3.0 * (1.0 + alpha) * (d as f64 + 2.0) + 2.0);
            let beta = 1.0 / (2.0 * b * (b + 1.0));
            (b, beta, alpha, gamma)
        }
        Mode::Tame => {
            let get = |v: Option<f64>, name: &'static str| -> Result<f64, SchemeError> {
                let v = v.ok_or(SchemeError::MissingTameParameter(name))?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(SchemeError::BadParameter(format!("{name} = {v} must be a positive real")));
                }
                Ok(v)
            };
            (get(overrides.b, "b")?, get(overrides.beta, "beta")?, get(overrides.alpha, "alpha")?, get(overrides.gamma, "gamma")?)
        }
    };
    let s = ParamSchedule { p, p_prime, r, d, a, b, beta, alpha, gamma, mode, warnings: Vec::new() };
    if !s.lambda(1).is_finite() {
        warnings.push(format!("lambda_1 = a^b = {a}^{b} overflows f64; expected in paper mode"));
    } else if !s.lambda(2).is_finite() {
        warnings.push("lambda_2 overflows f64; kappa_0 = 20/delta_2 is unrepresentable".into());
    }
    Ok(ParamSchedule { warnings, ..s })
}

impl ParamSchedule {
    /// `λ_q = a^{b^q}`.
    pub fn lambda(&self, q: usize) -> f64 {
        self.a.powf(self.b.powi(q as i32))
    }

    /// `δ_q = λ_q^{−2β}`.
    pub fn delta(&self, q: usize) -> f64 {
        self.lambda(q).powf(-2.0 * self.beta)
    }

    /// `ℓ_q = λ_q^{−1−α}`.
    pub fn ell(&self, q: usize) -> f64 {
        self.lambda(q).powf(-1.0 - self.alpha)
    }

    /// `μ_q = λ_q^γ` (used as `μ_{q+1}` at stage `q`).
    pub fn mu(&self, q: usize) -> f64 {
        self.lambda(q).powf(self.gamma)
    }

    /// `κ_q = 20/δ_{q+2}`.
    pub fn kappa(&self, q: usize) -> f64 {
        20.0 / self.delta(q + 2)
    }

    /// `Σ_{q≥0} δ_{q+1}` truncated once terms drop below 1e−16 (or after 64 terms).
    pub fn delta_sum(&self) -> f64 {
        let mut s = 0.0;
        for q in 1..=64 {
            let t = self.delta(q);
            if !t.is_finite() {
                break;
            }
            s += t;
            if t < 1e-16 {
                break;
            }
        }
        s
    }

    /// `λ_q` as an exact integer, required for periodizing blocks on the grid.
    pub fn lambda_int(&self, q: usize) -> Result<usize, SchemeError> {
        let l = self.lambda(q);
        let r = l.round();
        if !l.is_finite() || (l - r).abs() > 1e-9 * r.max(1.0) || r < 1.0 || r > 1e15 {
            return Err(SchemeError::NonIntegerLambda { q, lambda: l });
        }
        Ok(r as usize)
    }

    /// Human-readable dump of every derived constant for stages `0..=stages`.
    pub fn describe(&self, stages: usize) -> String {
        let mut s = format!(
            "mode = {}\np = {}\np_prime = {}\nr = {}\nd = {}\na = {}\nb = {}\nbeta = {:e}\nalpha = {}\ngamma = {}\n",
            self.mode.name(),
            self.p,
            self.p_prime,
            self.r,
            self.d,
            self.a,
            self.b,
            self.beta,
            self.alpha,
            self.gamma
        );
        for q in 0..=stages {
            s.push_str(&format!(
                "stage {q}: lambda = {:e} delta = {:e} ell = {:e} mu_next = {:e} kappa = {:e}\n",
                self.lambda(q),
                self.delta(q),
                self.ell(q),
                self.mu(q + 1),
                self.kappa(q)
            ));
        }
        for w in &self.warnings {
            s.push_str(&format!("warning: {w}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_constants_for_p2_r1_d4() {
        let s = make_schedule(2.0, 1.0, 4, 2.0, Mode::Paper, Overrides::default()).unwrap();
        assert_eq!(s.gamma, 3.0);
        assert_eq!(s.alpha, 19.0);
        assert_eq!(s.b, 724.0);
        assert_eq!(s.beta, 1.0 / (2.0 * 724.0 * 725.0));
        assert_eq!(s.p_prime, 2.0);
    }

    #[test]
    fn hypothesis_rejections() {
        assert!(exponent_hypothesis(2.0, 1.0, 4));
        assert!(matches!(
            make_schedule(2.0, 3.0, 4, 2.0, Mode::Paper, Overrides::default()),
            Err(SchemeError::ExponentHypothesisViolated { .. })
        ));
    }

    #[test]
    fn paper_mode_overflow_warns() {
        let s = make_schedule(2.0, 1.0, 4, 40.0, Mode::Paper, Overrides::default()).unwrap();
        assert!(!s.lambda(1).is_finite());
        assert!(!s.warnings.is_empty());
    }

    #[test]
    fn tame_mode_is_verbatim() {
        let o = Overrides { b: Some(2.0), beta: Some(0.7), alpha: Some(2.0), gamma: Some(1.0) };
        let s = make_schedule(2.0, 1.0, 4, 2.0, Mode::Tame, o).unwrap();
        assert_eq!((s.b, s.beta, s.alpha, s.gamma), (2.0, 0.7, 2.0, 1.0));
        assert_eq!(s.lambda_int(0).unwrap(), 2);
        assert_eq!(s.lambda_int(1).unwrap(), 4);
        assert_eq!(s.lambda_int(2).unwrap(), 16);
        assert!((s.ell(0) - 0.125).abs() < 1e-15);
        assert!((s.mu(1) - 4.0).abs() < 1e-12);
        assert!((s.kappa(0) - 20.0 * 16f64.powf(1.4)).abs() < 1e-9);
        let missing = Overrides { gamma: None, ..o };
        assert!(matches!(make_schedule(2.0, 1.0, 4, 2.0, Mode::Tame, missing), Err(SchemeError::MissingTameParameter("gamma"))));
    }

    #[test]
    fn non_integer_lambda_detected() {
        let o = Overrides { b: Some(1.5), beta: Some(0.5), alpha: Some(1.0), gamma: Some(1.0) };
        let s = make_schedule(2.0, 1.0, 4, 2.0, Mode::Tame, o).unwrap();
        assert!(s.lambda_int(1).is_err());
    }
}
