//! The `peakscope` command line.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver failure,
//! 3 check failure.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{parse_config, parse_point, RunConfig};
use crate::energy::{
    energy_breakdown, nehari_residual, pohozaev_residual, pucci_serrin_residual, TestField,
};
use crate::error::Error;
use crate::locator::{certify, scan_candidates, CertifiedCandidate, CheckOutcome};
use crate::radial::{
    fit_decay_rate, ode_residual, FrozenCoefficients, RadialProfile, ShootOptions,
};
use crate::sigma::{scan_sigma, GroundStateLandscape};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

/// Environment variable overriding the configured seed.
pub const SEED_ENV: &str = "PEAKSCOPE_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "peakscope",
    version,
    about = "Ground states, energy landscapes and concentration candidates"
)]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory (overrides `output` in the config; default ".").
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ground state at one point: profile.csv and energy.json.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Point z as "z1,z2,...".
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Σ and its gradient on the box grid: sigma_scan.csv.
    ScanSigma {
        #[arg(long)]
        config: PathBuf,
    },
    /// Candidate concentration points with certification: candidates.jsonl.
    Locate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Residual checks of a stored profile: check.json.
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        /// Point whose frozen coefficients the profile is checked against
        /// (default: the origin).
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Solver(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Solver(_) => EXIT_SOLVER,
            Failure::Check(_) => EXIT_CHECK,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Solver(m) | Failure::Check(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::Expr(_) | Error::NonPositiveCoefficient { .. } => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Solver(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Solver(format!("{}: {e}", path.display()))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return EXIT_CONFIG;
        }
        pool = pool.num_threads(jobs);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start workers: {e}");
            return EXIT_SOLVER;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn load(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut cfg =
        parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if let Ok(seed) = std::env::var(SEED_ENV) {
        cfg.seed = seed.trim().parse().map_err(|_| {
            Failure::Config(format!("{SEED_ENV} = `{seed}` is not an unsigned integer"))
        })?;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
    Ok(dir)
}

fn landscape(cfg: &RunConfig) -> Result<GroundStateLandscape, Failure> {
    let opts = ShootOptions {
        tol: cfg.tolerances.shoot,
        ..ShootOptions::default()
    };
    Ok(GroundStateLandscape::with_options(
        cfg.field.clone(),
        cfg.params.clone(),
        opts,
    )?)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| io_failure(path, e))
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Solve { config, at } => {
            let cfg = load(config)?;
            let z =
                parse_point(at, cfg.params.n).map_err(|m| Failure::Config(format!("--at: {m}")))?;
            solve(&cfg, &z, &out_dir(cli, &cfg)?)
        }
        Command::ScanSigma { config } => {
            let cfg = load(config)?;
            scan(&cfg, &out_dir(cli, &cfg)?)
        }
        Command::Locate { config } => {
            let cfg = load(config)?;
            locate(&cfg, &out_dir(cli, &cfg)?)
        }
        Command::Check {
            config,
            profile,
            at,
        } => {
            let cfg = load(config)?;
            let z = match at {
                Some(text) => parse_point(text, cfg.params.n)
                    .map_err(|m| Failure::Config(format!("--at: {m}")))?,
                None => vec![0.0; cfg.params.n],
            };
            check(&cfg, profile, &z, &out_dir(cli, &cfg)?)
        }
    }
}

fn solve(cfg: &RunConfig, z: &[f64], out: &Path) -> Result<(), Failure> {
    let frozen = cfg.field.eval(z)?.frozen;
    let land = landscape(cfg)?;
    let profile = land.ground_state(frozen)?;
    let energy = energy_breakdown(&profile, &frozen)?;
    log::info!(
        "w(0) = {:.16e}, I = {:.16e}",
        profile.shooting_value,
        energy.i_value
    );
    let mut csv = Vec::new();
    profile
        .write_csv(&mut csv)
        .map_err(|e| Failure::Solver(e.to_string()))?;
    write_file(&out.join("profile.csv"), &csv)?;
    write_file(&out.join("energy.json"), &json_bytes(&energy))
}

fn require_box(cfg: &RunConfig) -> Result<&crate::field::BoxDomain, Failure> {
    cfg.domain
        .as_ref()
        .ok_or_else(|| Failure::Config("config key `box` at byte 0: missing required key".into()))
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn scan(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let domain = require_box(cfg)?;
    let land = landscape(cfg)?;
    let rows = scan_sigma(&land, domain, cfg.grid_n);
    let n = cfg.params.n;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header: Vec<String> = (1..=n).map(|i| format!("z{i}")).collect();
    header.push("sigma".into());
    header.extend((1..=n).map(|i| format!("grad{i}")));
    header.push("error".into());
    w.write_record(&header)
        .map_err(|e| Failure::Solver(e.to_string()))?;
    let mut failed = 0;
    for row in rows {
        let mut rec: Vec<String> = row.z.iter().map(|&x| fmt_num(x)).collect();
        match row.outcome {
            Ok((sigma, grad)) => {
                rec.push(fmt_num(sigma));
                rec.extend(grad.into_iter().map(fmt_num));
                rec.push(String::new());
            }
            Err(msg) => {
                failed += 1;
                rec.extend(std::iter::repeat_n(String::new(), n + 1));
                rec.push(msg);
            }
        }
        w.write_record(&rec)
            .map_err(|e| Failure::Solver(e.to_string()))?;
    }
    if failed > 0 {
        log::warn!("{failed} grid points were rejected; see the error column");
    }
    let bytes = w.into_inner().map_err(|e| Failure::Solver(e.to_string()))?;
    write_file(&out.join("sigma_scan.csv"), &bytes)
}

fn locate(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let domain = require_box(cfg)?;
    let mut field = cfg.field.clone();
    let per_axis = (2 * cfg.grid_n + 1).max(9);
    field.certify_positive(domain, cfg.tolerances.floor, per_axis)?;
    let land = landscape(cfg)?;
    let outcome = scan_candidates(&land, domain, cfg.grid_n, cfg.tolerances.locate)?;
    let mut lines = Vec::new();
    if outcome.degenerate {
        let record = json!({
            "degenerate_landscape": true,
            "grid_median_N_norm": outcome.grid_median_norm,
            "grid_max_N_norm": outcome.grid_max_norm,
        });
        writeln!(lines, "{record}").expect("in-memory write");
    } else {
        let opts = cfg.certify_options();
        let certified: Vec<CertifiedCandidate> = outcome
            .candidates
            .par_iter()
            .map(|report| CertifiedCandidate {
                certification: certify(report, &land, &opts),
                report: report.clone(),
            })
            .collect();
        for c in &certified {
            assert!(
                !c.report.in_c_set || c.report.lin_dep,
                "in_C_set without lin_dep"
            );
            let line = serde_json::to_string(c).expect("serializable");
            writeln!(lines, "{line}").expect("in-memory write");
        }
        log::info!(
            "{} candidates from {} seeds, {} certified",
            certified.len(),
            outcome.seeds,
            certified
                .iter()
                .filter(|c| c.certification.certified)
                .count()
        );
    }
    write_file(&out.join("candidates.jsonl"), &lines)
}

#[derive(Serialize)]
struct CoordinateResidual {
    cutoff_radius: f64,
    value: f64,
}

#[derive(Serialize)]
struct CheckReport {
    verdict: &'static str,
    at: Vec<f64>,
    frozen: FrozenCoefficients,
    checks: Vec<CheckOutcome>,
    coordinate_residuals: Vec<CoordinateResidual>,
    failing: Vec<&'static str>,
}

fn check(cfg: &RunConfig, path: &Path, z: &[f64], out: &Path) -> Result<(), Failure> {
    let frozen = cfg.field.eval(z)?.frozen;
    let file =
        fs::File::open(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let profile = RadialProfile::read_csv(BufReader::new(file), cfg.params.clone(), frozen)?;
    let tol = &cfg.tolerances;
    let mut checks = Vec::new();
    let mut coordinate_residuals = Vec::new();
    let verdict = if profile.is_trivial() {
        "trivial"
    } else {
        // A check that cannot be evaluated fails with NaN.
        let val = |r: Result<f64, Error>| r.unwrap_or(f64::NAN);
        let mut push = |name, value: f64, threshold: f64| {
            checks.push(CheckOutcome {
                name,
                value,
                threshold,
                passed: value <= threshold,
            });
        };
        push(
            "ode_residual",
            val(ode_residual(&profile, &frozen)),
            tol.residual,
        );
        push(
            "pohozaev",
            val(pohozaev_residual(&profile, &frozen)),
            tol.residual,
        );
        let nehari =
            energy_breakdown(&profile, &frozen).map(|e| nehari_residual(&e, &frozen, cfg.params.p));
        push("nehari", val(nehari), tol.residual);
        let decay = fit_decay_rate(&profile, &frozen).map(|d| d.relative_error());
        push("decay", val(decay), tol.decay);
        let r_max = profile.r.last().copied().unwrap_or(0.0);
        for fraction in [0.25, 0.5, 0.75] {
            let radius = fraction * r_max;
            let field = TestField::Coordinate {
                axis: 0,
                cutoff_radius: radius,
            };
            let value = val(pucci_serrin_residual(&profile, &frozen, field));
            if fraction == 0.5 {
                push("coordinate", value, tol.coordinate);
            }
            coordinate_residuals.push(CoordinateResidual {
                cutoff_radius: radius,
                value,
            });
        }
        if checks.iter().all(|c| c.passed) {
            "pass"
        } else {
            "fail"
        }
    };
    let failing: Vec<&'static str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    let report = CheckReport {
        verdict,
        at: z.to_vec(),
        frozen,
        checks,
        coordinate_residuals,
        failing: failing.clone(),
    };
    write_file(&out.join("check.json"), &json_bytes(&report))?;
    if verdict == "fail" {
        return Err(Failure::Check(format!(
            "failed checks: {}",
            failing.join(", ")
        )));
    }
    Ok(())
}
