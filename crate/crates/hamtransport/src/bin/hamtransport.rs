//! Command-line front end. Every subcommand prints its checks and exits with status 0 iff
//! all hard assertions pass.

use clap::{Parser, Subcommand};
use hamtransport::blocks::measure_scaling;
use hamtransport::checks::{
    antidiv_suite, blocks_suite, geometry_suite, profile_suite, run_stages, scaling_suite, schedule_suite,
    structural_checks, Suite,
};
use hamtransport::geometry::build_direction_set;
use hamtransport::io::{create_dir, emit_diagnostics, read_config, read_snapshot, write_schedule, write_snapshot, Snapshot};
use hamtransport::scheme::StageDiagnostics;
use hamtransport::trajectories::integrate_curves;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::error::Error;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hamtransport", about = "Convex-integration stages for Hamiltonian transport on the torus")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Direction set and decomposition checks.
    Geometry {
        #[command(subcommand)]
        action: GeometryCmd,
    },
    /// Building-block identities and scaling laws.
    Blocks {
        #[command(subcommand)]
        action: BlocksCmd,
    },
    /// Anti-divergence identities.
    Antidiv {
        #[command(subcommand)]
        action: AntidivCmd,
    },
    /// Runs the stages of a config, writing snapshots, diagnostics.csv and schedule.txt.
    Iterate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Integral curves of the field of a scalar snapshot; CSV columns t, curve_id, x_1..x_d, H.
    Trajectories {
        #[arg(long)]
        field: PathBuf,
        /// A file of whitespace-separated points, `grid:K` (K^d lattice) or `random:N`.
        #[arg(long)]
        starts: String,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fast verification suites, or the diagnostics of a finished run with `--run`.
    Report {
        #[arg(long)]
        run: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GeometryCmd {
    Verify {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum BlocksCmd {
    Verify,
    /// Fitted slopes; with `--out`, a CSV of (field, k, s, mu, norm, slope, predicted).
    Scaling {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AntidivCmd {
    Check {
        #[arg(long, default_value_t = 24)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn finish(suites: &[Suite]) -> ExitCode {
    let mut ok = true;
    for s in suites {
        print!("{s}");
        ok &= s.pass();
    }
    println!("{}", if ok { "all checks pass" } else { "some checks FAILED" });
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn scaling_csv(path: &Path) -> Result<(), Box<dyn Error>> {
    let ds = build_direction_set(4, 0.125)?;
    let mut csv = String::from("field,k,s,mu,norm,slope,predicted\n");
    for (k, s) in [(0, 1.0), (0, 2.0), (1, 2.0)] {
        for fit in measure_scaling(&ds, 1.0, 2.0, s, k, &[4.0, 8.0, 16.0], 512)? {
            for (mu, norm) in fit.mus.iter().zip(&fit.norms) {
                writeln!(csv, "{},{k},{s},{mu},{norm:.12e},{:.6},{:.6}", fit.field.name(), fit.slope, fit.predicted)?;
            }
        }
    }
    std::fs::write(path, csv)?;
    Ok(())
}

fn iterate_cmd(config: &Path) -> Result<Suite, Box<dyn Error>> {
    let cfg = read_config(config)?;
    create_dir(&cfg.out)?;
    let schedule = cfg.schedule()?;
    write_schedule(&schedule, cfg.stages, cfg.seed, &cfg.out.join("schedule.txt"))?;
    let states = run_stages(&cfg)?;
    for st in &states {
        let q = st.q;
        write_snapshot(&Snapshot::TimeScalar(st.rho.clone()), &cfg.out.join(format!("stage{q}_rho.pfld")))?;
        write_snapshot(&Snapshot::TimeScalar(st.drho.clone()), &cfg.out.join(format!("stage{q}_drho.pfld")))?;
        write_snapshot(&Snapshot::Scalar(st.ham.clone()), &cfg.out.join(format!("stage{q}_ham.pfld")))?;
        write_snapshot(&Snapshot::TimeVector(st.r.clone()), &cfg.out.join(format!("stage{q}_r.pfld")))?;
    }
    let ledger = &states.last().expect("starting state").diagnostics;
    if !ledger.is_empty() {
        emit_diagnostics(ledger, cfg.seed, &cfg.out.join("diagnostics.csv"))?;
    }
    let mut suite = structural_checks(&cfg, &states);
    suite.note(format!("outputs in {}", cfg.out.display()));
    Ok(suite)
}

fn parse_starts(spec: &str, d: usize, seed: u64) -> Result<Vec<Vec<f64>>, Box<dyn Error>> {
    if let Some(k) = spec.strip_prefix("grid:") {
        let k: usize = k.parse()?;
        let total = k.checked_pow(d as u32).ok_or("grid too large")?;
        return Ok((0..total)
            .map(|mut c| {
                (0..d)
                    .map(|_| {
                        let v = (c % k) as f64 / k as f64;
                        c /= k;
                        v
                    })
                    .collect()
            })
            .collect());
    }
    if let Some(n) = spec.strip_prefix("random:") {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok((0..n.parse::<usize>()?).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect());
    }
    let text = std::fs::read_to_string(spec)?;
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|l| {
            let p: Vec<f64> = l.split_whitespace().map(str::parse).collect::<Result<_, _>>()?;
            if p.len() != d {
                return Err(format!("start `{l}` has {} coordinates, expected {d}", p.len()).into());
            }
            Ok(p)
        })
        .collect()
}

fn trajectories_cmd(field: &Path, starts: &str, h: f64, t_end: f64, seed: u64, out: &Path) -> Result<Suite, Box<dyn Error>> {
    let ham = match read_snapshot(field)? {
        Snapshot::Scalar(f) => f,
        _ => return Err("trajectories need a scalar (Hamiltonian) snapshot".into()),
    };
    let d = ham.grid().d;
    let starts = parse_starts(starts, d, seed)?;
    let ens = integrate_curves(&ham, &starts, h, t_end)?;
    let mut csv = String::from("t,curve_id");
    for a in 1..=d {
        write!(csv, ",x_{a}")?;
    }
    csv.push_str(",H\n");
    for (c, (path, trace)) in ens.paths.iter().zip(&ens.hamiltonian_trace).enumerate() {
        for ((t, x), hv) in ens.times.iter().zip(path).zip(trace) {
            write!(csv, "{t:.10e},{c}")?;
            for v in x {
                write!(csv, ",{v:.15e}")?;
            }
            writeln!(csv, ",{hv:.15e}")?;
        }
    }
    std::fs::write(out, csv)?;
    let mut s = Suite::new("trajectories");
    s.note(format!("{} curves, {} samples each, written to {}", starts.len(), ens.times.len(), out.display()));
    s.note(format!("max |H(gamma(t)) - H(gamma(0))| = {:.3e}", ens.max_drift()));
    s.push(hamtransport::checks::Check::flag("positions wrapped to [0,1)^d", ens.paths.iter().flatten().flatten().all(|v| (0.0..1.0).contains(v)), ""));
    Ok(s)
}

fn report_run(dir: &Path) -> Result<Suite, Box<dyn Error>> {
    let text = std::fs::read_to_string(dir.join("diagnostics.csv"))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty diagnostics")?.split(',').collect();
    let mut s = Suite::new(&format!("diagnostics of {}", dir.display()));
    let schema = StageDiagnostics::COLUMNS.iter().chain(std::iter::once(&"seed")).copied().collect::<Vec<_>>();
    s.push(hamtransport::checks::Check::flag("column schema", header == schema, format!("{} columns", header.len())));
    for row in lines {
        for (k, v) in header.iter().zip(row.split(',')) {
            s.note(format!("{k:>18} = {v}"));
        }
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<Vec<Suite>, Box<dyn Error>> {
    Ok(match cli.cmd {
        Cmd::Geometry { action: GeometryCmd::Verify { samples, seed } } => vec![geometry_suite(samples, seed)?],
        Cmd::Blocks { action: BlocksCmd::Verify } => vec![blocks_suite()?],
        Cmd::Blocks { action: BlocksCmd::Scaling { out } } => {
            if let Some(p) = out {
                scaling_csv(&p)?;
            }
            vec![scaling_suite()?]
        }
        Cmd::Antidiv { action: AntidivCmd::Check { cases, seed } } => vec![antidiv_suite(cases, seed)?],
        Cmd::Iterate { config } => vec![iterate_cmd(&config)?],
        Cmd::Trajectories { field, starts, h, t_end, seed, out } => vec![trajectories_cmd(&field, &starts, h, t_end, seed, &out)?],
        Cmd::Report { run: Some(dir) } => vec![report_run(&dir)?],
        Cmd::Report { run: None } => vec![geometry_suite(10_000, 0)?, profile_suite(10_000, 0)?, antidiv_suite(24, 0)?, schedule_suite()],
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(suites) => finish(&suites),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
