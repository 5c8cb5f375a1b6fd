//! Run configuration, binary field snapshots and the diagnostics CSV.
//!
//! # Config format
//! One `key = value` per line, `#` starts a comment, blank lines ignored, unknown keys
//! rejected. Keys and defaults:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `d`, `n`, `n_t` | grid | required |
//! | `t_end` | time horizon | 1 |
//! | `p`, `r` | exponents | required |
//! | `mode` | `tame` or `paper` | required |
//! | `a` | base of `λ_q = a^{b^q}` | 2 |
//! | `b`, `alpha`, `beta`, `gamma` | tame overrides | required in tame mode |
//! | `rho_profile` | block radius parameter `ρ` | 0.125 |
//! | `init` | `tce` or `hamil` | `tce` |
//! | `lambda0` | oscillation of the starting triple | 20a |
//! | `delta` | `Δ` for `hamil` | `Σ δ_{q+1}` |
//! | `stages` | number of iterations | 1 |
//! | `seed` | sampling seed | 0 |
//! | `out` | output directory | `out` |
//! | `tol.residual`, `tol.mass`, `tol.mean_zero`, `tol.window`, `tol.u_identity` | hard-assertion tolerances | 1e-6, 1e-10, 1e-12, 1e-10, 1e-10 |
//! | `target.decrease` | required `‖R_q‖/‖R_{q+1}‖`, 0 disables | 0 |
//!
//! # Snapshot format `PFLD1`
//! Little-endian: 8-byte magic `PFLD1\0\0\0`; `u32` kind (0 scalar, 1 vector, 2 scalar time
//! family, 3 vector time family); `u32` d, n, n_t; `f64` t_end; `u32` components, slices;
//! `u64` value count; then the `f64` values, slice-major, component-major, grid order.
//!
//! # Diagnostics CSV
//! Header [`StageDiagnostics::COLUMNS`] followed by `seed`; one row per stage.

use crate::field::{FieldError, GridSpec, ScalarField, TimeField, VectorField};
use crate::scheme::{exponent_hypothesis, make_schedule, Mode, Overrides, ParamSchedule, SchemeError, StageDiagnostics};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigIssue {
    Parse { line: usize, key: String, msg: String },
    UnknownKey { line: usize, key: String },
    Validation(String),
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigIssue::Parse { line, key, msg } => write!(f, "line {line}, key `{key}`: {msg}"),
            ConfigIssue::UnknownKey { line, key } => write!(f, "line {line}: unknown key `{key}`"),
            ConfigIssue::Validation(m) => write!(f, "validation: {m}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("config rejected:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<ConfigIssue>),
    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("snapshot format error: {0}")]
    Format(String),
    #[error("diagnostics ledger is empty")]
    EmptyLedger,
    #[error(transparent)]
    Field(#[from] FieldError),
}

impl IoError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        IoError::Io { path: path.display().to_string(), msg: e.to_string() }
    }

    pub fn issues(&self) -> &[ConfigIssue] {
        match self {
            IoError::Config(v) => v,
            _ => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitKind {
    Tce,
    Hamil,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub residual: f64,
    pub mass: f64,
    pub mean_zero: f64,
    pub window: f64,
    pub u_identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { residual: 1e-6, mass: 1e-10, mean_zero: 1e-12, window: 1e-10, u_identity: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub p: f64,
    pub r: f64,
    pub mode: Mode,
    pub a: f64,
    pub overrides: Overrides,
    pub rho: f64,
    pub init: InitKind,
    pub lambda0: Option<usize>,
    pub delta: Option<f64>,
    pub stages: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub tolerances: Tolerances,
    pub target_decrease: f64,
}

impl RunConfig {
    pub fn schedule(&self) -> Result<ParamSchedule, SchemeError> {
        make_schedule(self.p, self.r, self.grid.d, self.a, self.mode, self.overrides)
    }

    /// Oscillation of the starting triple: `lambda0` if given, else `20a`.
    pub fn lambda0(&self) -> usize {
        self.lambda0.unwrap_or((20.0 * self.a).round() as usize)
    }
}

const KEYS: [&str; 27] = [
    "d",
    "n",
    "n_t",
    "t_end",
    "p",
    "r",
    "mode",
    "a",
    "b",
    "alpha",
    "beta",
    "gamma",
    "rho_profile",
    "init",
    "lambda0",
    "delta",
    "stages",
    "seed",
    "out",
    "tol.residual",
    "tol.mass",
    "tol.mean_zero",
    "tol.window",
    "tol.u_identity",
    "target.decrease",
    "calculus",
    "note",
];

pub fn parse_config(text: &str) -> Result<RunConfig, IoError> {
    let mut issues = Vec::new();
    let mut raw: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            issues.push(ConfigIssue::Parse { line: ln, key: body.to_string(), msg: "expected `key = value`".into() });
            continue;
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if !KEYS.contains(&k.as_str()) {
            issues.push(ConfigIssue::UnknownKey { line: ln, key: k });
            continue;
        }
        if raw.insert(k.clone(), (ln, v)).is_some() {
            issues.push(ConfigIssue::Parse { line: ln, key: k, msg: "duplicate key".into() });
        }
    }
    let mut num = |key: &str, required: bool| -> Option<f64> {
        match raw.get(key) {
            None => {
                if required {
                    issues.push(ConfigIssue::Validation(format!("missing required key `{key}`")));
                }
                None
            }
            Some((ln, v)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Some(x),
                _ => {
                    issues.push(ConfigIssue::Parse { line: *ln, key: key.into(), msg: format!("`{v}` is not a finite number") });
                    None
                }
            },
        }
    };
    let d = num("d", true);
    let n = num("n", true);
    let n_t = num("n_t", true);
    let t_end = num("t_end", false).unwrap_or(1.0);
    let p = num("p", true);
    let r = num("r", true);
    let a = num("a", false).unwrap_or(2.0);
    let b = num("b", false);
    let alpha = num("alpha", false);
    let beta = num("beta", false);
    let gamma = num("gamma", false);
    let rho = num("rho_profile", false).unwrap_or(0.125);
    let lambda0 = num("lambda0", false);
    let delta = num("delta", false);
    let stages = num("stages", false).unwrap_or(1.0);
    let seed = num("seed", false).unwrap_or(0.0);
    let dt = Tolerances::default();
    let tolerances = Tolerances {
        residual: num("tol.residual", false).unwrap_or(dt.residual),
        mass: num("tol.mass", false).unwrap_or(dt.mass),
        mean_zero: num("tol.mean_zero", false).unwrap_or(dt.mean_zero),
        window: num("tol.window", false).unwrap_or(dt.window),
        u_identity: num("tol.u_identity", false).unwrap_or(dt.u_identity),
    };
    let target_decrease = num("target.decrease", false).unwrap_or(0.0);
    let word = |key: &str| raw.get(key).map(|(l, v)| (*l, v.clone()));
    let mode = match word("mode") {
        None => {
            issues.push(ConfigIssue::Validation("missing required key `mode`".into()));
            None
        }
        Some((_, v)) if v == "tame" => Some(Mode::Tame),
        Some((_, v)) if v == "paper" => Some(Mode::Paper),
        Some((l, v)) => {
            issues.push(ConfigIssue::Parse { line: l, key: "mode".into(), msg: format!("`{v}` is not `tame` or `paper`") });
            None
        }
    };
    let init = match word("init") {
        None => InitKind::Tce,
        Some((_, v)) if v == "tce" => InitKind::Tce,
        Some((_, v)) if v == "hamil" => InitKind::Hamil,
        Some((l, v)) => {
            issues.push(ConfigIssue::Parse { line: l, key: "init".into(), msg: format!("`{v}` is not `tce` or `hamil`") });
            InitKind::Tce
        }
    };
    if let Some((l, v)) = word("calculus") {
        if v != "spectral" {
            issues.push(ConfigIssue::Parse { line: l, key: "calculus".into(), msg: "only `spectral` is supported".into() });
        }
    }
    let out = PathBuf::from(word("out").map_or("out".to_string(), |(_, v)| v));

    let is_count = |x: f64| x >= 0.0 && x.fract() == 0.0 && x < 1e9;
    for (key, v) in [("d", d), ("n", n), ("n_t", n_t), ("stages", Some(stages)), ("seed", Some(seed))] {
        if let Some(x) = v {
            if !is_count(x) {
                issues.push(ConfigIssue::Validation(format!("`{key}` = {x} must be a non-negative integer")));
            }
        }
    }
    if let Some(l) = lambda0 {
        if !(is_count(l) && l >= 1.0) {
            issues.push(ConfigIssue::Validation(format!("`lambda0` = {l} must be a positive integer")));
        }
    }
    for (key, v) in [
        ("tol.residual", tolerances.residual),
        ("tol.mass", tolerances.mass),
        ("tol.mean_zero", tolerances.mean_zero),
        ("tol.window", tolerances.window),
        ("tol.u_identity", tolerances.u_identity),
    ] {
        if !(v > 0.0) {
            issues.push(ConfigIssue::Validation(format!("tolerance `{key}` = {v} must be > 0")));
        }
    }
    if !(rho > 0.0 && rho < 0.25) {
        issues.push(ConfigIssue::Validation(format!("`rho_profile` = {rho} must lie in (0, 1/4)")));
    }
    let grid = match (d, n, n_t) {
        (Some(d), Some(n), Some(nt)) if is_count(d) && is_count(n) && is_count(nt) => {
            match GridSpec::with_t_end(d as usize, n as usize, nt as usize, t_end) {
                Ok(g) => Some(g),
                Err(e) => {
                    issues.push(ConfigIssue::Validation(e.to_string()));
                    None
                }
            }
        }
        _ => None,
    };
    if let (Some(p), Some(r), Some(g)) = (p, r, grid) {
        if !exponent_hypothesis(p, r, g.d) {
            issues.push(ConfigIssue::Validation(format!(
                "exponent hypothesis 1/p + 1/r > 1 + 1/(d-1) fails for p = {p}, r = {r}, d = {}",
                g.d
            )));
        }
    }
    let overrides = Overrides { b, beta, alpha, gamma };
    let cfg = match (grid, p, r, mode) {
        (Some(grid), Some(p), Some(r), Some(mode)) if issues.is_empty() => RunConfig {
            grid,
            p,
            r,
            mode,
            a,
            overrides,
            rho,
            init,
            lambda0: lambda0.map(|l| l as usize),
            delta,
            stages: stages as usize,
            seed: seed as u64,
            out,
            tolerances,
            target_decrease,
        },
        _ => return Err(IoError::Config(issues)),
    };
    if let Err(e) = cfg.schedule() {
        return Err(IoError::Config(vec![ConfigIssue::Validation(e.to_string())]));
    }
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<RunConfig, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_config(&text)
}

/// Any field that can be persisted.
#[derive(Clone, Debug, PartialEq)]
pub enum Snapshot {
    Scalar(ScalarField),
    Vector(VectorField),
    TimeScalar(TimeField<ScalarField>),
    TimeVector(TimeField<VectorField>),
}

const MAGIC: &[u8; 8] = b"PFLD1\0\0\0";
const HEADER_LEN: usize = 8 + 4 * 4 + 8 + 4 * 2 + 8;

impl Snapshot {
    fn parts(&self) -> (u32, GridSpec, u32, u32, Vec<&[f64]>) {
        match self {
            Snapshot::Scalar(f) => (0, *f.grid(), 1, 1, vec![f.values()]),
            Snapshot::Vector(v) => (1, *v.grid(), v.grid().d as u32, 1, v.components().iter().map(|c| c.values()).collect()),
            Snapshot::TimeScalar(t) => (2, *t.grid(), 1, t.len() as u32, t.slices().iter().map(|c| c.values()).collect()),
            Snapshot::TimeVector(t) => (
                3,
                *t.grid(),
                t.grid().d as u32,
                t.len() as u32,
                t.slices().iter().flat_map(|v| v.components().iter().map(|c| c.values())).collect(),
            ),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (kind, g, comps, slices, chunks) = self.parts();
        let count: usize = chunks.iter().map(|c| c.len()).sum();
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * count);
        out.extend_from_slice(MAGIC);
        for v in [kind, g.d as u32, g.n as u32, g.n_t as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&g.t_end.to_le_bytes());
        out.extend_from_slice(&comps.to_le_bytes());
        out.extend_from_slice(&slices.to_le_bytes());
        out.extend_from_slice(&(count as u64).to_le_bytes());
        for c in chunks {
            for v in c {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, IoError> {
        let fmt = |m: &str| IoError::Format(m.to_string());
        if b.len() < HEADER_LEN {
            return Err(fmt("truncated header"));
        }
        if &b[..8] != MAGIC {
            return Err(fmt("bad magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(b[o..o + 4].try_into().expect("4 bytes"));
        let (kind, d, n, n_t) = (u32_at(8), u32_at(12) as usize, u32_at(16) as usize, u32_at(20) as usize);
        let t_end = f64::from_le_bytes(b[24..32].try_into().expect("8 bytes"));
        let (comps, slices) = (u32_at(32) as usize, u32_at(36) as usize);
        let count = u64::from_le_bytes(b[40..48].try_into().expect("8 bytes")) as usize;
        let grid = GridSpec::with_t_end(d, n, n_t, t_end).map_err(|e| IoError::Format(format!("bad grid in header: {e}")))?;
        let want_shape = match kind {
            0 => (1, 1),
            1 => (d, 1),
            2 => (1, n_t),
            3 => (d, n_t),
            k => return Err(IoError::Format(format!("unknown kind {k}"))),
        };
        if (comps, slices) != want_shape {
            return Err(fmt("component/slice counts inconsistent with kind"));
        }
        let expect = grid.len().checked_mul(comps * slices).ok_or_else(|| fmt("size overflow"))?;
        if count != expect {
            return Err(IoError::Format(format!("header declares {count} values, grid needs {expect}")));
        }
        let payload = &b[HEADER_LEN..];
        if payload.len() != 8 * count {
            return Err(IoError::Format(format!("payload has {} bytes, header declares {}", payload.len(), 8 * count)));
        }
        let vals: Vec<f64> = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        let mut fields = vals.chunks_exact(grid.len()).map(|c| ScalarField::from_vec(grid, c.to_vec()));
        let mut next = || fields.next().expect("count checked");
        Ok(match kind {
            0 => Snapshot::Scalar(next()?),
            1 => Snapshot::Vector(VectorField::from_components((0..d).map(|_| next()).collect::<Result<_, _>>()?)?),
            2 => Snapshot::TimeScalar(TimeField::new(grid, (0..n_t).map(|_| next()).collect::<Result<_, _>>()?)?),
            _ => {
                let mut sl = Vec::new();
                for _ in 0..n_t {
                    sl.push(VectorField::from_components((0..d).map(|_| next()).collect::<Result<_, _>>()?)?);
                }
                Snapshot::TimeVector(TimeField::new(grid, sl)?)
            }
        })
    }
}

pub fn write_snapshot(s: &Snapshot, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, s.to_bytes()).map_err(|e| IoError::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, IoError> {
    let b = std::fs::read(path).map_err(|e| IoError::io(path, e))?;
    Snapshot::from_bytes(&b)
}

/// CSV text for a ledger; errors on an empty ledger.
pub fn diagnostics_csv(ledger: &[StageDiagnostics], seed: u64) -> Result<String, IoError> {
    if ledger.is_empty() {
        return Err(IoError::EmptyLedger);
    }
    let mut s = StageDiagnostics::COLUMNS.join(",");
    s.push_str(",seed\n");
    for d in ledger {
        s.push_str(&d.row().join(","));
        s.push_str(&format!(",{seed}\n"));
    }
    Ok(s)
}

pub fn emit_diagnostics(ledger: &[StageDiagnostics], seed: u64, path: &Path) -> Result<(), IoError> {
    let s = diagnostics_csv(ledger, seed)?;
    std::fs::write(path, s).map_err(|e| IoError::io(path, e))
}

/// Writes the resolved schedule next to the outputs.
pub fn write_schedule(s: &ParamSchedule, stages: usize, seed: u64, path: &Path) -> Result<(), IoError> {
    let text = format!("{}seed = {seed}\n", s.describe(stages));
    std::fs::write(path, text).map_err(|e| IoError::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<(), IoError> {
    std::fs::create_dir_all(path).map_err(|e| IoError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const MINIMAL: &str = "d = 4\nn = 32\nn_t = 16\np = 2\nr = 1\nmode = tame\nb = 2\nalpha = 2\nbeta = 0.7\ngamma = 1\n";

    #[test]
    fn minimal_config_accepted() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.grid, GridSpec::new(4, 32, 16).unwrap());
        assert_eq!(c.mode, Mode::Tame);
        assert_eq!(c.lambda0(), 40);
        assert_eq!(c.tolerances, Tolerances::default());
    }

    #[test]
    fn hypothesis_violation_cited() {
        let text = MINIMAL.replace("r = 1", "r = 3");
        let e = parse_config(&text).unwrap_err();
        assert!(e.issues().iter().any(|i| matches!(i, ConfigIssue::Validation(m) if m.contains("1/p + 1/r"))), "{e}");
    }

    #[test]
    fn unknown_key_named() {
        let text = format!("{MINIMAL}lamda0 = 3 # typo\n");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.issues(), &[ConfigIssue::UnknownKey { line: 11, key: "lamda0".into() }]);
        assert!(e.to_string().contains("lamda0"));
    }

    #[test]
    fn several_errors_reported_together() {
        let e = parse_config("d = 4\nn = x\nmode = wild\ntol.mass = 0\n").unwrap_err();
        assert!(e.issues().len() >= 4, "{e}");
    }

    fn random_field(g: GridSpec, rng: &mut ChaCha8Rng) -> ScalarField {
        ScalarField::from_vec(g, (0..g.len()).map(|_| rng.gen::<f64>() * 1e3 - 5e2).collect()).unwrap()
    }

    #[test]
    fn snapshot_round_trip_is_bit_identical() {
        let g = GridSpec::with_t_end(2, 8, 3, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = Snapshot::Scalar(random_field(g, &mut rng));
        let v = Snapshot::Vector(VectorField::from_components(vec![random_field(g, &mut rng), random_field(g, &mut rng)]).unwrap());
        let ts = Snapshot::TimeScalar(TimeField::from_fn(g, |_, _| random_field(g, &mut rng)).unwrap());
        let mut rng2 = ChaCha8Rng::seed_from_u64(2);
        let tv = Snapshot::TimeVector(
            TimeField::from_fn(g, |_, _| {
                VectorField::from_components(vec![random_field(g, &mut rng2), random_field(g, &mut rng2)]).unwrap()
            })
            .unwrap(),
        );
        for snap in [s, v, ts, tv] {
            let bytes = snap.to_bytes();
            let back = Snapshot::from_bytes(&bytes).unwrap();
            assert_eq!(back.to_bytes(), bytes);
            assert_eq!(back, snap);
        }
    }

    #[test]
    fn corrupt_snapshots_rejected() {
        let g = GridSpec::new(2, 8, 2).unwrap();
        let bytes = Snapshot::Scalar(ScalarField::constant(g, 1.5)).to_bytes();
        assert!(matches!(Snapshot::from_bytes(&bytes[..bytes.len() - 3]), Err(IoError::Format(_))));
        assert!(matches!(Snapshot::from_bytes(&bytes[..20]), Err(IoError::Format(_))));
        let mut bad = bytes.clone();
        bad[40..48].copy_from_slice(&(7u64).to_le_bytes());
        assert!(matches!(Snapshot::from_bytes(&bad), Err(IoError::Format(_))));
        let mut magic = bytes;
        magic[0] = b'X';
        assert!(matches!(Snapshot::from_bytes(&magic), Err(IoError::Format(_))));
    }

    #[test]
    fn diagnostics_schema() {
        assert!(matches!(diagnostics_csv(&[], 0), Err(IoError::EmptyLedger)));
        let d = StageDiagnostics { stage: 1, ..Default::default() };
        let csv = diagnostics_csv(&[d], 42).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        let mut want: Vec<&str> = StageDiagnostics::COLUMNS.to_vec();
        want.push("seed");
        assert_eq!(lines[0].split(',').collect::<Vec<_>>(), want);
        assert_eq!(&want[..9], &["stage", "L1_R", "L1_drho", "W2r_dH", "Linf_dH", "L1_dflux", "inf_drho", "cutoff_window", "residual"]);
        assert_eq!(lines[1].split(',').count(), want.len());
        assert!(lines[1].ends_with(",42"));
    }
}
