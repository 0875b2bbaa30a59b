//! The `haydys` command line.
//!
//! Exit codes: 0 success, 1 validation failure, 2 solver non-convergence,
//! 64 usage error, 65 unreadable or corrupt HMF1 input.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use haydys_core::bps::{self, Configuration};
use haydys_core::haydys::{kappa, kw_residual, HaydysProblem, SolveOptions};
use haydys_core::linear_model;
use haydys_core::linops::{Direction, LinearizedOperator};
use haydys_core::rng;
use haydys_core::{calculus, dimred, Grid};
use serde_json::{json, Value};
use thiserror::Error;

use crate::hmf1::{Hmf1, Hmf1Error};
use crate::parallel::Threads;
use crate::report::{self, Clock, GridMeta, Meta};
use crate::suites::{self, Check};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

#[derive(Debug, Parser)]
#[command(name = "haydys", version, about = "Haydys monopoles on R^3: seeds, spectra, fixed-point solves and identity checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub rng_seed: u64,
    /// Worker threads; falls back to HAYDYS_THREADS, then 1.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Report a wall time of zero so identical runs give identical reports.
    #[arg(long, global = true, env = "HAYDYS_FIXED_CLOCK")]
    pub fixed_clock: bool,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Sites per axis (odd, at least 9).
    #[arg(long, default_value_t = 65)]
    pub n: usize,
    /// Truncation radius.
    #[arg(long, default_value_t = 8.0)]
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Group {
    Su2,
    Su3,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the charge-1 Bogomolny seed.
    Seed {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Bogomolny, Haydys and Kapustin-Witten residuals of a configuration.
    Residual {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Energy and its eight terms.
    Energy {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Flux charge through a sphere.
    Charge {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 6.0)]
        shell: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Project a zero-mode candidate onto ker D.
    Tangent {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_direction)]
        dir: Direction,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Extreme eigenvalues of DD*.
    Gap {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Fixed-point construction of a Haydys monopole.
    Solve {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long, value_parser = parse_direction)]
        dir: Direction,
        #[arg(long, default_value_t = 0.05)]
        t: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 60)]
        max_outer: usize,
        #[arg(long)]
        cg_tol: Option<f64>,
        #[arg(long)]
        cg_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Dyadic search for the largest contracting t.
    Tmax {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long, value_parser = parse_direction)]
        dir: Direction,
        #[arg(long, default_value_t = 0.05)]
        t_start: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Dimensional-reduction defects of a configuration.
    Dimred {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Identities of the quaternionic linear model.
    LinearModel {
        #[arg(long, value_enum, default_value_t = Group::Su2)]
        group: Group,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Every suite; exit 1 if any check fails.
    VerifyAll {
        /// Cap grids at n = 33 and skip the spectral and solver suites.
        #[arg(long)]
        quick: bool,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    Direction::parse(s).ok_or_else(|| format!("unknown direction {s:?}; expected x, y, z or phase"))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Data { path: PathBuf, source: Hmf1Error },
    #[error("{0}")]
    Core(#[from] haydys_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data { .. } => EXIT_DATA,
            CliError::Core(haydys_core::Error::NotConverged { .. }) => EXIT_NOT_CONVERGED,
            CliError::Core(_) | CliError::Io { .. } => EXIT_VALIDATION,
        }
    }
}

/// What a finished command reports.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
}

struct Ctx {
    global: Global,
    clock: Clock,
    threads: Threads,
    command: &'static str,
}

impl Ctx {
    fn meta(&self, grid: Option<&Grid>) -> Meta {
        Meta {
            version: report::VERSION,
            command: self.command.into(),
            grid: grid.map(GridMeta::from),
            rng_seed: self.global.rng_seed,
            threads: self.threads.0,
            wall_time_s: self.clock.elapsed(),
        }
    }

    fn finish(&self, grid: Option<&Grid>, result: Value, path: Option<&Path>, code: i32) -> Result<Outcome, CliError> {
        let report = report::envelope(&self.meta(grid), result);
        if let Some(p) = path {
            let text = serde_json::to_string_pretty(&report).expect("reports serialise");
            fs::write(p, text + "\n").map_err(|source| CliError::Io { path: p.into(), source })?;
        }
        Ok(Outcome { code, report })
    }
}

fn load(path: &Path) -> Result<Hmf1, CliError> {
    Hmf1::load(path).map_err(|source| CliError::Data { path: path.into(), source })
}

fn load_config(path: &Path) -> Result<Configuration, CliError> {
    load(path)?.to_configuration().map_err(|source| CliError::Data { path: path.into(), source })
}

fn save(file: &Hmf1, path: &Path) -> Result<(), CliError> {
    file.save(path).map_err(|e| match e {
        Hmf1Error::Io(source) => CliError::Io { path: path.into(), source },
        other => CliError::Data { path: path.into(), source: other },
    })
}

fn grid_of(g: &GridArgs) -> Result<Grid, CliError> {
    if !(g.radius > 0.0) || !g.radius.is_finite() {
        return Err(CliError::Usage(format!("radius must be positive, got {}", g.radius)));
    }
    Grid::with_radius(g.n, g.radius).map_err(|e| CliError::Usage(e.to_string()))
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {x}")))
    }
}

fn checks_json(checks: &[Check]) -> Value {
    json!(checks)
}

fn code_of(checks: &[Check]) -> i32 {
    if suites::all_passed(checks) {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Result<Outcome, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(cli)
}

pub fn execute(cli: Cli) -> Result<Outcome, CliError> {
    let threads = Threads::resolve(cli.global.threads);
    let command = match &cli.command {
        Command::Seed { .. } => "seed",
        Command::Residual { .. } => "residual",
        Command::Energy { .. } => "energy",
        Command::Charge { .. } => "charge",
        Command::Tangent { .. } => "tangent",
        Command::Gap { .. } => "gap",
        Command::Solve { .. } => "solve",
        Command::Tmax { .. } => "tmax",
        Command::Dimred { .. } => "dimred",
        Command::LinearModel { .. } => "linear-model",
        Command::VerifyAll { .. } => "verify-all",
    };
    let ctx = Ctx { clock: Clock::start(cli.global.fixed_clock), global: cli.global, threads, command };
    let seed = ctx.global.rng_seed;
    match cli.command {
        Command::Seed { grid, out, report } => {
            let g = grid_of(&grid)?;
            let m = bps::bps_seed(&g);
            save(&Hmf1::from_configuration(&m), &out)?;
            let res = bps::bogomolny_residual(&m);
            let result = json!({ "out": out, "bogomolny_residual": res.l2_norm(), "bogomolny_residual_max": res.max_norm() });
            ctx.finish(Some(&g), result, report.as_deref(), EXIT_OK)
        }
        Command::Residual { input, report } => {
            let c = load_config(&input)?;
            let res = bps::bogomolny_residual(&c);
            let (k, kw) = (kappa(&c), kw_residual(&c));
            let result = json!({
                "real": c.is_real(),
                "bogomolny_residual": res.l2_norm(),
                "bogomolny_residual_max": res.max_norm(),
                "kappa_norms": k.norms(),
                "kappa_norm": k.l2_norm(),
                "kw_norms": kw.norms(),
                "kw_norm": kw.l2_norm(),
                "imaginary_norm": c.imaginary_part().l2_norm(),
            });
            ctx.finish(Some(c.grid()), result, report.as_deref(), EXIT_OK)
        }
        Command::Energy { input, report } => {
            let c = load_config(&input)?;
            let e = bps::energy(&c);
            let terms: serde_json::Map<String, Value> = e.as_array().iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            let mean = 0.5 * (e.curvature + e.grad_phi);
            let pairing = if mean > 0.0 { (e.curvature - e.grad_phi).abs() / mean } else { 0.0 };
            let result = json!({ "total": e.total(), "terms": terms, "bogomolny_pairing": pairing });
            ctx.finish(Some(c.grid()), result, report.as_deref(), EXIT_OK)
        }
        Command::Charge { input, shell, report } => {
            let c = load_config(&input)?;
            let q = bps::charge(&c, positive("shell", shell)?)?;
            ctx.finish(Some(c.grid()), json!({ "shell": shell, "charge": q }), report.as_deref(), EXIT_OK)
        }
        Command::Tangent { input, dir, out, report } => {
            let c = load_config(&input)?;
            let op = LinearizedOperator::new(&c)?;
            let v = op.make_tangent(dir)?;
            save(&Hmf1::from_pair(&v), &out)?;
            let dv = op.apply_d(&v)?.l2_norm();
            let h1 = calculus::norm_h1(&c.nabla, &c.phi, &v)?;
            let result = json!({
                "direction": dir.name(),
                "out": out,
                "norm": v.l2_norm(),
                "norm_h1": h1,
                "d_norm": dv,
                "d_norm_over_h1": dv / h1,
            });
            ctx.finish(Some(c.grid()), result, report.as_deref(), EXIT_OK)
        }
        Command::Gap { input, report } => {
            let c = load_config(&input)?;
            let op = LinearizedOperator::new(&c)?;
            let lmin = op.lambda_min_ddstar(seed)?;
            let lmax = op.lambda_max_ddstar(seed)?;
            let result = json!({ "lambda_min": lmin, "lambda_max": lmax, "norm_Dstar": lmax.sqrt() });
            let code = if lmin > 0.0 { EXIT_OK } else { EXIT_VALIDATION };
            ctx.finish(Some(c.grid()), result, report.as_deref(), code)
        }
        Command::Solve { seed: path, dir, t, tol, max_outer, cg_tol, cg_max, out, report } => {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(CliError::Usage(format!("t must be nonnegative, got {t}")));
            }
            positive("tol", tol)?;
            let m = load_config(&path)?;
            let mut op = LinearizedOperator::new(&m)?;
            if let Some(x) = cg_tol {
                op.cg_tol = positive("cg-tol", x)?;
            }
            if let Some(x) = cg_max {
                op.cg_max = x;
            }
            let v0 = op.make_tangent(dir)?;
            let nd = op.norm_dstar(seed)?;
            let problem = HaydysProblem::new(&op, &m, &v0, nd)?;
            let mut opts = SolveOptions::new(tol, max_outer, &op);
            opts.track_h2 = true;
            let sol = problem.solve(t, &opts, None, &ctx.threads)?;
            if let Some(p) = &out {
                save(&Hmf1::from_configuration(&sol.config), p)?;
            }
            let mut result = report::solve_report(&sol.report);
            result["direction"] = json!(dir.name());
            result["kw_norm"] = json!(kw_residual(&sol.config).l2_norm());
            let code = if sol.report.converged && !sol.report.diverged { EXIT_OK } else { EXIT_NOT_CONVERGED };
            ctx.finish(Some(m.grid()), result, report.as_deref(), code)
        }
        Command::Tmax { seed: path, dir, t_start, report } => {
            let m = load_config(&path)?;
            let op = LinearizedOperator::new(&m)?;
            let v0 = op.make_tangent(dir)?;
            let nd = op.norm_dstar(seed)?;
            let green_norm = 1.0 / op.lambda_min_ddstar(seed)?;
            let problem = HaydysProblem::new(&op, &m, &v0, nd)?;
            let opts = SolveOptions::new(1e-6, 6, &op);
            let r = problem.t_max_probe(positive("t-start", t_start)?, &opts, green_norm, &ctx.threads)?;
            let mut result = report::tmax_report(&r);
            result["direction"] = json!(dir.name());
            ctx.finish(Some(m.grid()), result, report.as_deref(), EXIT_OK)
        }
        Command::Dimred { input, report } => {
            let c = load_config(&input)?;
            let d = dimred::dimred_check(&c)?;
            let result = json!({
                "re_defect": d.re_defect,
                "im_defect": d.im_defect,
                "div_defect": d.div_defect,
                "asd_residual": d.asd_residual,
                "kappa_norm": d.kappa_norm,
            });
            let code = if d.max_defect() <= 1e-12 { EXIT_OK } else { EXIT_VALIDATION };
            ctx.finish(Some(c.grid()), result, report.as_deref(), code)
        }
        Command::LinearModel { group, trials, report } => {
            if trials == 0 {
                return Err(CliError::Usage("trials must be at least 1".into()));
            }
            let n = match group {
                Group::Su2 => 2,
                Group::Su3 => 3,
            };
            let mut r = rng::seeded(seed);
            let rep = suites::linear_model_identities(n, trials, &mut r)?;
            let (slope, _) = suites::hamiltonian_slope(n, trials.min(50), &mut r);
            let mut result = report::identity_report(&rep);
            result["group"] = json!(format!("su({n})"));
            result["trials"] = json!(trials);
            result["hamiltonian_slope_deviation"] = json!(slope);
            result["convention"] = json!({
                "signs": linear_model::CONVENTION.signs,
                "rows": linear_model::CONVENTION.rows,
            });
            let ok = rep.all_passed() && slope <= 0.1;
            ctx.finish(None, result, report.as_deref(), if ok { EXIT_OK } else { EXIT_VALIDATION })
        }
        Command::VerifyAll { quick, mut grid, trials, report } => {
            if trials == 0 {
                return Err(CliError::Usage("trials must be at least 1".into()));
            }
            if quick {
                grid.n = grid.n.min(33);
            }
            let g = grid_of(&grid)?;
            let (mut checks, identities) = suites::identity_suite(trials, seed)?;
            let (seed_checks, seed_details) = suites::seed_suite(&g)?;
            checks.extend(seed_checks);
            let mut result = json!({ "quick": quick, "identities": identities, "seed": seed_details });
            if !quick {
                let (solver_checks, details) = suites::solver_suite(&g, Direction::X, 0.05, seed, ctx.threads)?;
                checks.extend(solver_checks);
                result["solver"] = details;
            }
            result["checks"] = checks_json(&checks);
            result["all_passed"] = json!(suites::all_passed(&checks));
            ctx.finish(Some(&g), result, report.as_deref(), code_of(&checks))
        }
    }
}

/// Entry point used by the binary: prints the report, returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(cli) {
        Ok(out) => {
            println!("{}", serde_json::to_string_pretty(&out.report).expect("reports serialise"));
            out.code
        }
        Err(e) => {
            eprintln!("haydys: {e}");
            e.exit_code()
        }
    }
}
