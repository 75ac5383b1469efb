//! Command-line runner for the pricing experiments.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 config error, 3 model
//! validation failure, 4 resource guard.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use rmpricing::demand::{DemandError, DemandModel, ModelFile};
use rmpricing::experiments::{
    build_policy, format_table2, regret_rows, run_experiment, run_ho_compare, run_sweep, run_table2, write_csv,
    ExperimentConfig, ExperimentError, HoCompareConfig, SweepConfig, SweepKind,
};
use rmpricing::fluid::{solve_fluid_multi, solve_fluid_single, FluidError};
use rmpricing::policies::{dp_value, solve_dp, solve_dp_multi, PolicyError, PolicyKind};
use rmpricing::sim::{simulate, SimError};

#[derive(Parser)]
#[command(name = "rmpricing-cli", version, about = "Dynamic pricing experiments: fluid model, re-solving, exact DP")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo replications; overrides the config.
    #[arg(long, global = true)]
    replications: Option<usize>,
    /// Allow horizons above 2^15 in the regret table.
    #[arg(long, global = true)]
    sliced_dp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the fluid problem for an inventory rate vector; prints JSON.
    FluidSolve {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated inventory rates, one per product.
        #[arg(long, value_delimiter = ',', required = true)]
        inventory: Vec<f64>,
    },
    /// Optimal expected revenue V[T][y0].
    DpValue {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        horizon: usize,
        /// Initial inventory, comma-separated for multi-product models.
        #[arg(long, value_delimiter = ',', required = true)]
        y0: Vec<usize>,
        /// Write the optimal action table (t, y, demand_rate, price) as CSV.
        #[arg(long)]
        dump_actions: Option<PathBuf>,
    },
    /// Simulate one path; writes the trace as CSV.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        policy: PolicyKind,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        y0: usize,
    },
    /// Regret of each configured policy; needs --config.
    EstimateRegret,
    /// Fluid / static / re-solving regret table (preset unless --config).
    Table2,
    /// Re-solving regret curves over T (gap preset unless --config or --kind).
    Sweep {
        #[arg(long, value_parser = ["gap", "concavity"])]
        kind: Option<String>,
    },
    /// Hindsight benchmark against the fluid value (preset unless --config).
    HoCompare,
    /// Check a model file against the modelling assumptions; prints JSON.
    ValidateModel {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let code = if e.is_resource_guard() {
            4
        } else if e.is_model_invalid() {
            3
        } else {
            match &e {
                ExperimentError::Config(_)
                | ExperimentError::Sim(SimError::InvalidInput(_))
                | ExperimentError::Sim(SimError::Demand(_))
                | ExperimentError::Sim(SimError::Solver(PolicyError::Unsupported(_)))
                | ExperimentError::Sim(SimError::Policy { source: PolicyError::Unsupported(_), .. }) => 2,
                _ => 1,
            }
        };
        Self { code, message: e.to_string() }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        ExperimentError::from(e).into()
    }
}

impl From<PolicyError> for Failure {
    fn from(e: PolicyError) -> Self {
        ExperimentError::from(e).into()
    }
}

impl From<DemandError> for Failure {
    fn from(e: DemandError) -> Self {
        ExperimentError::from(e).into()
    }
}

impl From<FluidError> for Failure {
    fn from(e: FluidError) -> Self {
        match e {
            FluidError::Demand(d) => d.into(),
            FluidError::Infeasible(_) => Failure::config(e.to_string()),
            other => Failure { code: 1, message: other.to_string() },
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn read_model(path: &Path) -> Result<ModelFile, Failure> {
    Ok(ModelFile::from_json(&read_input(path)?)?)
}

fn single_model(path: &Path) -> Result<DemandModel, Failure> {
    match read_model(path)? {
        ModelFile::Single(m) => Ok(m),
        ModelFile::Multi(_) => Err(Failure::config("this subcommand needs a single-product model")),
    }
}

/// Runs `write` against `--out` or standard output.
fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<(), Failure>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut file = io::BufWriter::new(fs::File::create(path)?);
            write(&mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn emit_csv<T: Serialize>(out: Option<&Path>, rows: &[T]) -> Result<(), Failure> {
    emit(out, |w| Ok(write_csv(rows, w)?))
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Failure> {
    emit(out, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Failure { code: 1, message: e.to_string() })?;
        Ok(writeln!(w)?)
    })
}

#[derive(Serialize)]
struct ActionRow {
    t: usize,
    y: usize,
    demand_rate: f64,
    price: f64,
}

#[derive(Serialize)]
struct ValidationReport<'a> {
    valid: bool,
    kind: &'a str,
    violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<serde_json::Value>,
}

fn validate_model(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let text = read_input(path)?;
    let report = match ModelFile::from_json(&text) {
        Ok(ModelFile::Single(m)) => ValidationReport {
            valid: true,
            kind: "single",
            violations: Vec::new(),
            details: serde_json::to_value(m.assumption_constants()).ok(),
        },
        Ok(ModelFile::Multi(m)) => {
            let v = m.validate();
            ValidationReport {
                valid: v.is_valid(),
                kind: "multi",
                violations: v.violations.iter().map(|x| x.to_string()).collect(),
                details: serde_json::to_value(&v).ok(),
            }
        }
        Err(DemandError::Invalid(v)) => ValidationReport {
            valid: false,
            kind: "single",
            violations: v.iter().map(|x| x.to_string()).collect(),
            details: None,
        },
        Err(e) => return Err(e.into()),
    };
    emit_json(cli.out.as_deref(), &report)?;
    if report.valid {
        Ok(())
    } else {
        Err(Failure { code: 3, message: format!("model violates {}", report.violations.join("; ")) })
    }
}

fn fluid_solve(cli: &Cli, model: &Path, inventory: &[f64]) -> Result<(), Failure> {
    let sol = match read_model(model)? {
        ModelFile::Single(m) => {
            let [x] = inventory else {
                return Err(Failure::config("a single-product model takes one inventory rate"));
            };
            solve_fluid_single(&m, *x)?
        }
        ModelFile::Multi(m) => {
            let v = m.validate();
            if !v.is_valid() {
                return Err(DemandError::Invalid(v.violations).into());
            }
            solve_fluid_multi(&m, inventory)?
        }
    };
    emit_json(cli.out.as_deref(), &sol)
}

fn dp_command(cli: &Cli, model: &Path, horizon: usize, y0: &[usize], dump: Option<&Path>) -> Result<(), Failure> {
    let value = match read_model(model)? {
        ModelFile::Single(m) => {
            let [y0] = y0 else {
                return Err(Failure::config("a single-product model takes one initial inventory"));
            };
            match dump {
                Some(path) => {
                    let table = solve_dp(&m, horizon, *y0)?;
                    let rows: Vec<ActionRow> = table
                        .actions()
                        .map(|(t, y, demand_rate, price)| ActionRow { t, y, demand_rate, price })
                        .collect();
                    emit_csv(Some(path), &rows)?;
                    table.value(horizon, *y0)
                }
                None => dp_value(&m, horizon, *y0)?,
            }
        }
        ModelFile::Multi(m) => {
            if dump.is_some() {
                return Err(Failure::config("--dump-actions is only available for single-product models"));
            }
            solve_dp_multi(&m, horizon, y0)?
        }
    };
    emit(cli.out.as_deref(), |w| Ok(writeln!(w, "{value}")?))
}

fn simulate_command(cli: &Cli, model: &Path, kind: PolicyKind, horizon: usize, y0: usize) -> Result<(), Failure> {
    let m = single_model(model)?;
    let seed = cli.seed.unwrap_or(0);
    let policy = build_policy(&m, kind, horizon, y0, seed)?;
    let trace = simulate(&m, policy.as_ref(), horizon, y0 as f64, seed)?;
    emit_csv(cli.out.as_deref(), &trace.records)?;
    eprintln!("total revenue {} (seed {seed})", trace.total_revenue);
    Ok(())
}

fn experiment_config(cli: &Cli, preset: Option<ExperimentConfig>) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match (&cli.config, preset) {
        (Some(path), _) => ExperimentConfig::from_json(&read_input(path)?)?,
        (None, Some(p)) => p,
        (None, None) => return Err(Failure::config("--config is required")),
    };
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(n) = cli.replications {
        cfg.replications = n;
    }
    Ok(cfg)
}

fn output_path(cli: &Cli, cfg: &ExperimentConfig) -> Option<PathBuf> {
    cli.out.clone().or_else(|| cfg.output.clone())
}

fn table2_command(cli: &Cli) -> Result<(), Failure> {
    let cfg = experiment_config(cli, Some(ExperimentConfig::table2()))?;
    let reports = run_table2(&cfg, cli.sliced_dp)?;
    let out = output_path(cli, &cfg);
    emit_csv(out.as_deref(), &regret_rows(&reports))?;
    let shown = format_table2(&reports);
    if out.is_some() {
        print!("{shown}");
    } else {
        eprint!("{shown}");
    }
    Ok(())
}

fn sweep_command(cli: &Cli, kind: Option<&str>) -> Result<(), Failure> {
    let cfg = match (&cli.config, kind) {
        (Some(path), _) => SweepConfig::from_json(&read_input(path)?)?,
        (None, Some("concavity")) => SweepConfig::concavity(),
        (None, _) => SweepConfig::gap(),
    };
    let res = run_sweep(&cfg)?;
    emit_csv(cli.out.as_deref(), &res.rows)?;
    if cfg.kind == SweepKind::Gap {
        match res.boundary_increasing {
            Some(up) => eprintln!("x_T = x^u: regret strictly increasing in T: {up}"),
            None => eprintln!("x_T = x^u not in the sweep"),
        }
    }
    Ok(())
}

fn ho_command(cli: &Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => HoCompareConfig::from_json(&read_input(path)?)?,
        None => HoCompareConfig::preset(),
    };
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(n) = cli.replications {
        cfg.replications = n;
    }
    let res = run_ho_compare(&cfg)?;
    emit_csv(cli.out.as_deref(), &res.rows)?;
    if let Some(t) = res.trend {
        eprintln!("Spearman rho(T, gap) = {:.4}, one-sided p = {:.4}", t.rho, t.p_value_positive);
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::FluidSolve { model, inventory } => fluid_solve(cli, model, inventory),
        Command::DpValue { model, horizon, y0, dump_actions } => {
            dp_command(cli, model, *horizon, y0, dump_actions.as_deref())
        }
        Command::Simulate { model, policy, horizon, y0 } => simulate_command(cli, model, *policy, *horizon, *y0),
        Command::EstimateRegret => {
            let cfg = experiment_config(cli, None)?;
            let reports = run_experiment(&cfg)?;
            emit_csv(output_path(cli, &cfg).as_deref(), &regret_rows(&reports))
        }
        Command::Table2 => table2_command(cli),
        Command::Sweep { kind } => sweep_command(cli, kind.as_deref()),
        Command::HoCompare => ho_command(cli),
        Command::ValidateModel { model } => validate_model(cli, model),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
