//! Command-line driver. Exit codes: 0 ok, 2 bad input or config, 3 solver
//! failure.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use backcom_noma::bb::{self, bb_solve, BbConfig, FeasMode};
use backcom_noma::experiment::{fig_mode, run_experiment, write_csv, ExperimentSpec, SolverKind};
use backcom_noma::format::{parse_instance, write_profile};
use backcom_noma::model::{oma_profile, oma_total, SystemInstance};
use backcom_noma::sca::{self, sca_solve, ScaOptions};
use backcom_noma::two_user::{
    grid_oracle, solve_conventional_two_user, solve_two_user, TwoUserInstance, DEFAULT_ORACLE_POINTS,
};
use backcom_noma::{Error, Result, SolveReport};
use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

#[derive(Parser)]
#[command(
    name = "backcom-noma",
    version,
    about = "Minimum-power resource allocation for BackCom-assisted hybrid NOMA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: GlobalOpts,
}

#[derive(clap::Args)]
struct GlobalOpts {
    /// Master seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per sweep point (overrides the config file).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output file (`solve`, `sweep`, `oracle`) or directory (`fig`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Feasibility oracle used by branch and bound.
    #[arg(long, global = true, value_enum)]
    feas_mode: Option<FeasArg>,
    /// BB gap tolerance as a fraction of the OMA total power.
    #[arg(long, global = true)]
    xi: Option<f64>,
    /// BB iteration budget.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeasArg {
    Sra,
    Sca,
}

impl From<FeasArg> for FeasMode {
    fn from(a: FeasArg) -> Self {
        match a {
            FeasArg::Sra => FeasMode::Sra,
            FeasArg::Sca => FeasMode::Sca,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveWith {
    Bb,
    Sca,
    TwoUser,
    Conventional,
    Oma,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance read from a fixture file.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "bb")]
        solver: SolveWith,
        /// Write the per-iteration trace (BB or SCA) as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the experiment described by a TOML spec.
    Sweep { config: PathBuf },
    /// Run the preset experiments of one figure.
    Fig { name: String },
    /// Run the two-user grid oracle on an instance file.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ORACLE_POINTS)]
        points: usize,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_instance(path: &Path) -> Result<SystemInstance> {
    parse_instance(&fs::read_to_string(path)?)
}

fn xi_rel(opts: &GlobalOpts) -> Result<Option<f64>> {
    match opts.xi {
        Some(x) if x.is_nan() || x <= 0.0 => Err(Error::Config("--xi must be positive".into())),
        x => Ok(x),
    }
}

fn write_report(out: &mut dyn Write, solver: &str, r: &SolveReport) -> Result<()> {
    writeln!(out, "# solver = {solver}")?;
    writeln!(out, "# objective = {}", r.objective)?;
    writeln!(out, "# status = {:?}", r.status)?;
    writeln!(out, "# upper_bound = {}", r.upper_bound)?;
    writeln!(out, "# lower_bound = {}", r.lower_bound)?;
    writeln!(out, "# iterations = {}", r.iterations)?;
    writeln!(out, "# oracle_calls = {}", r.stats.calls)?;
    writeln!(out, "# oracle_work = {}", r.stats.work)?;
    out.write_all(write_profile(&r.profile).as_bytes())?;
    Ok(())
}

fn solve(opts: &GlobalOpts, path: &Path, with: SolveWith, trace: Option<&Path>) -> Result<()> {
    let inst = read_instance(path)?;
    let (name, report, trace_rows) = match with {
        SolveWith::Bb => {
            let cfg = BbConfig {
                xi: xi_rel(opts)?.map(|x| x * oma_total(&inst)),
                n_max: opts.nmax.unwrap_or(BbConfig::default().n_max),
                feas_mode: opts.feas_mode.map_or(FeasMode::Sra, Into::into),
                ..Default::default()
            };
            cfg.validate()?;
            let sol = bb_solve(&inst, &cfg)?;
            if let Some(p) = trace {
                bb::write_trace_csv(&sol.trace, File::create(p)?)?;
            }
            ("bb", sol.report, None)
        }
        SolveWith::Sca => {
            let r = sca_solve(&inst, &oma_profile(&inst), &ScaOptions::default())?;
            let t = r.trace.clone();
            ("sca", r, Some(t))
        }
        SolveWith::TwoUser => (
            "two-user",
            solve_two_user(&TwoUserInstance::from_system(&inst)?)?.report,
            None,
        ),
        SolveWith::Conventional => {
            if inst.num_users() != 2 {
                return Err(Error::InvalidInstance("conventional solver needs 2 users".into()));
            }
            let sol = solve_conventional_two_user(inst.gamma(0, 0), inst.gamma(1, 1), inst.target_rate())?;
            ("conventional", sol.report, None)
        }
        SolveWith::Oma => (
            "oma",
            SolveReport::exact(oma_profile(&inst), backcom_noma::SolveStatus::Optimal),
            None,
        ),
    };
    if let (Some(p), Some(t)) = (trace, trace_rows) {
        sca::write_trace_csv(&t, File::create(p)?)?;
    }
    info!("{name}: objective {} ({:?})", report.objective, report.status);
    let mut out = output(opts.out.as_deref())?;
    write_report(&mut out, name, &report)?;
    out.flush()?;
    Ok(())
}

fn apply_overrides(spec: &mut ExperimentSpec, opts: &GlobalOpts) -> Result<()> {
    if let Some(s) = opts.seed {
        spec.seed = s;
    }
    if let Some(t) = opts.trials {
        spec.trials = t;
    }
    if let Some(x) = xi_rel(opts)? {
        spec.settings.xi_rel = x;
    }
    if let Some(n) = opts.nmax {
        spec.settings.n_max = n;
    }
    if let Some(mode) = opts.feas_mode {
        let bb_kind = match mode {
            FeasArg::Sra => SolverKind::BbSra,
            FeasArg::Sca => SolverKind::BbSca,
        };
        let mut solvers = Vec::new();
        for s in spec.solvers.drain(..) {
            let s = if s.feas_mode().is_some() { bb_kind } else { s };
            if !solvers.contains(&s) {
                solvers.push(s);
            }
        }
        spec.solvers = solvers;
    }
    spec.validate()
}

/// Runs `spec` and writes its CSV; returns the number of failed solver runs.
fn run_and_write(spec: &ExperimentSpec, jobs: Option<usize>, out: Option<&Path>) -> Result<usize> {
    let result = run_experiment(spec, jobs)?;
    let mut w = output(out)?;
    write_csv(&result, &mut w)?;
    w.flush()?;
    Ok(result.failures())
}

fn sweep(opts: &GlobalOpts, config: &Path) -> Result<usize> {
    let mut spec = ExperimentSpec::from_toml(&fs::read_to_string(config)?)?;
    apply_overrides(&mut spec, opts)?;
    run_and_write(&spec, opts.jobs, opts.out.as_deref())
}

fn fig(opts: &GlobalOpts, name: &str) -> Result<usize> {
    let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let mut failures = 0;
    for mut spec in fig_mode(name)? {
        apply_overrides(&mut spec, opts)?;
        let path = dir.join(format!("{}.csv", spec.name));
        failures += run_and_write(&spec, opts.jobs, Some(&path))?;
        info!("wrote {}", path.display());
    }
    Ok(failures)
}

fn oracle(opts: &GlobalOpts, path: &Path, points: usize) -> Result<()> {
    let inst = TwoUserInstance::from_system(&read_instance(path)?)?;
    let g = grid_oracle(&inst, points).ok_or(Error::Infeasible)?;
    let mut out = output(opts.out.as_deref())?;
    writeln!(out, "# solver = grid-oracle")?;
    writeln!(out, "# objective = {}", g.objective)?;
    writeln!(out, "# p0 = {}", g.p0)?;
    writeln!(out, "# coarse_step = {}", g.coarse_step)?;
    writeln!(out, "# fine_step = {}", g.fine_step)?;
    writeln!(out, "# points = {}", g.points)?;
    out.write_all(write_profile(&inst.profile(g.p0, g.p1, g.p2)).as_bytes())?;
    out.flush()?;
    Ok(())
}

fn exit_code(e: &Error) -> ExitCode {
    ExitCode::from(if e.is_input_error() { 2 } else { 3 })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let opts = &cli.opts;
    if opts.jobs == Some(0) {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Solve {
            instance,
            solver,
            trace,
        } => solve(opts, instance, *solver, trace.as_deref()).map(|_| 0),
        Command::Sweep { config } => sweep(opts, config),
        Command::Fig { name } => fig(opts, name),
        Command::Oracle { instance, points } => oracle(opts, instance, *points).map(|_| 0),
    };
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failures) => {
            warn!("{failures} solver runs failed; see the failures line of the CSV header");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
