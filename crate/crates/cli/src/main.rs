//! `cranopt`: batch experiments for outage/fronthaul tradeoff caching.
//!
//! Every command resolves a scenario (a shipped preset or a TOML file), applies
//! command-line overrides, writes CSV tables and a `manifest.json` into
//! `--out`, and prints a short summary. Failures print a JSON error record on
//! stderr and exit with 2 (validation), 3 (budget refusal) or 4 (numerical).

mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cranopt::scenario::{ScenarioFile, PRESETS};
use serde_json::json;

#[derive(Parser)]
#[command(name = "cranopt", version, about = "Cache placement tradeoffs between outage and fronthaul usage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic received-SNR CDF against Monte-Carlo for each distance set.
    ValidateAnalytics(Common),
    /// Cell-average outage and fronthaul usage of MPC and LB-LCD versus the
    /// outage threshold and the popularity exponent.
    CellMetrics(Common),
    /// Every candidate placement's (outage, fronthaul) pair with the
    /// nondominated and weighted-sum-supported points flagged.
    Pareto(Common),
    /// Exact optimum for each weight by enumeration.
    Exhaustive(Common),
    /// Objective versus weight for GA, mode selection, MPC, LB-LCD and the
    /// random and probabilistic baselines.
    SweepEta(Common),
    /// One GA run at the first weight given; writes the per-generation history.
    GaRun(Common),
    /// GA optimum placement and objective for each weight in the grid.
    Table5(Common),
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Preset name or path to a scenario TOML file.
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for the GA and the Monte-Carlo streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Weights: a list `0,0.5,1` or an inclusive range `start:step:end`.
    #[arg(long)]
    eta: Option<String>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    threads: Option<usize>,
    /// Simpson subdivisions as `UxV`.
    #[arg(long)]
    quadrature: Option<String>,
    /// Fading draws (validate-analytics) or baseline placements per point (sweep-eta).
    #[arg(long)]
    draws: Option<usize>,
    /// Largest candidate count exhaustive enumeration may visit.
    #[arg(long, default_value_t = cranopt::solvers::DEFAULT_BUDGET)]
    budget: f64,
}

#[derive(Debug)]
pub enum CliError {
    Core(cranopt::Error),
    Output(String),
}

impl CliError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Output(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        use cranopt::Error as E;
        match self {
            CliError::Core(E::BudgetExceeded { .. }) => 3,
            CliError::Core(E::IllConditioned { .. } | E::Colocated { .. } | E::NoCrossover(_)) => 4,
            CliError::Core(_) | CliError::Output(_) => 2,
        }
    }

    fn record(&self, command: &str) -> serde_json::Value {
        let mut rec = match self {
            CliError::Core(e) => json!({ "kind": e.kind(), "message": e.to_string() }),
            CliError::Output(m) => json!({ "kind": "output", "message": m }),
        };
        rec["command"] = json!(command);
        rec["exit_code"] = json!(self.exit_code());
        match self {
            CliError::Core(cranopt::Error::Invalid { field, .. }) => rec["field"] = json!(field),
            CliError::Core(cranopt::Error::BudgetExceeded { count, reduced, budget }) => {
                rec["count"] = json!(count);
                rec["reduced_count"] = json!(reduced);
                rec["budget"] = json!(budget);
            }
            _ => {}
        }
        rec
    }
}

impl From<cranopt::Error> for CliError {
    fn from(e: cranopt::Error) -> Self {
        CliError::Core(e)
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Core(cranopt::Error::invalid(field, reason))
}

fn load_scenario(source: &str) -> Result<ScenarioFile, CliError> {
    if let Some(file) = ScenarioFile::preset(source) {
        return Ok(file);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(invalid("--scenario", format!("{source} is neither a file nor a preset ({})", PRESETS.join(", "))));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(ScenarioFile::from_toml(&text)?)
}

/// `0,0.5,1` or `start:step:end`.
pub fn parse_eta(text: &str) -> Result<Vec<f64>, CliError> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| invalid("--eta", format!("not a number: {s:?}")));
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [start, step, end] => {
            let (start, step, end) = (num(start)?, num(step)?, num(end)?);
            if step.is_nan() || step <= 0.0 || end < start {
                return Err(invalid("--eta", "range needs step > 0 and end >= start"));
            }
            let n = ((end - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect()
        }
        [_] => text.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(invalid("--eta", "expected a list or start:step:end")),
    };
    if values.is_empty() {
        return Err(invalid("--eta", "no weights given"));
    }
    Ok(values)
}

fn parse_quadrature(text: &str) -> Result<(usize, usize), CliError> {
    let (u, v) =
        text.split_once(['x', 'X']).ok_or_else(|| invalid("--quadrature", format!("expected UxV, got {text:?}")))?;
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| invalid("--quadrature", format!("bad count {s:?}")));
    Ok((parse(u)?, parse(v)?))
}

/// Scenario after presets, files and command-line overrides.
pub struct Resolved {
    pub file: ScenarioFile,
    pub out: PathBuf,
    pub budget: f64,
    pub threads: usize,
}

fn resolve(args: &Common, default_preset: &str, draws_target: DrawsTarget) -> Result<Resolved, CliError> {
    let mut file = load_scenario(args.scenario.as_deref().unwrap_or(default_preset))?;
    if let Some(seed) = args.seed {
        file.ga.seed = seed;
        file.sim.seed = seed;
    }
    if let Some(eta) = &args.eta {
        file.eta_grid = parse_eta(eta)?;
    }
    if let Some(q) = &args.quadrature {
        let (u, v) = parse_quadrature(q)?;
        file.quadrature.u = u;
        file.quadrature.v = v;
    }
    if let Some(draws) = args.draws {
        match draws_target {
            DrawsTarget::Fading => file.sim.fading_draws = draws,
            DrawsTarget::Baseline => file.sweep.baseline_draws = draws,
            DrawsTarget::Unused => return Err(invalid("--draws", "not used by this command")),
        }
    }
    file.validate()?;
    if file.sweep.baseline_draws == 0 {
        return Err(invalid("sweep.baseline_draws", "must be >= 1"));
    }
    if args.budget.is_nan() || args.budget < 1.0 {
        return Err(invalid("--budget", "must be >= 1"));
    }
    let threads = match args.threads {
        Some(0) => return Err(invalid("--threads", "must be >= 1")),
        Some(n) => {
            // a second call in one process is harmless; the first pool wins
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            n
        }
        None => rayon::current_num_threads(),
    };
    Ok(Resolved { file, out: args.out.clone(), budget: args.budget, threads })
}

#[derive(Clone, Copy)]
enum DrawsTarget {
    Fading,
    Baseline,
    Unused,
}

fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::ValidateAnalytics(a) => commands::validate_analytics(resolve(a, "fig2", DrawsTarget::Fading)?),
        Command::CellMetrics(a) => commands::cell_metrics(resolve(a, "fig4_5", DrawsTarget::Unused)?),
        Command::Pareto(a) => commands::pareto(resolve(a, "fig5_pareto", DrawsTarget::Unused)?),
        Command::Exhaustive(a) => commands::exhaustive(resolve(a, "fig5_pareto", DrawsTarget::Unused)?),
        Command::SweepEta(a) => commands::sweep_eta(resolve(a, "fig6_9", DrawsTarget::Baseline)?),
        Command::GaRun(a) => commands::ga_run(resolve(a, "fig6_9", DrawsTarget::Unused)?),
        Command::Table5(a) => commands::table5(resolve(a, "fig5_pareto", DrawsTarget::Unused)?),
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::ValidateAnalytics(_) => "validate-analytics",
        Command::CellMetrics(_) => "cell-metrics",
        Command::Pareto(_) => "pareto",
        Command::Exhaustive(_) => "exhaustive",
        Command::SweepEta(_) => "sweep-eta",
        Command::GaRun(_) => "ga-run",
        Command::Table5(_) => "table5",
    }
}

fn out_dir(command: &Command) -> &Path {
    match command {
        Command::ValidateAnalytics(a)
        | Command::CellMetrics(a)
        | Command::Pareto(a)
        | Command::Exhaustive(a)
        | Command::SweepEta(a)
        | Command::GaRun(a)
        | Command::Table5(a) => &a.out,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = e.record(command_name(&cli.command));
            let text = serde_json::to_string(&record).expect("error record serializes");
            eprintln!("{text}");
            let dir = out_dir(&cli.command);
            if std::fs::create_dir_all(dir).is_ok() {
                let _ = std::fs::write(dir.join("error.json"), text + "\n");
            }
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_lists_and_ranges() {
        assert_eq!(parse_eta("0,0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        let r = parse_eta("0:0.1:1").unwrap();
        assert_eq!(r.len(), 11);
        assert_eq!(r[3], 0.3);
        assert!(parse_eta("0:0:1").is_err());
        assert!(parse_eta("a,b").is_err());
    }

    #[test]
    fn quadrature_flag() {
        assert_eq!(parse_quadrature("6x8").unwrap(), (6, 8));
        assert!(parse_quadrature("6").is_err());
    }

    #[test]
    fn exit_codes() {
        let budget = CliError::Core(cranopt::Error::BudgetExceeded { count: 1.0, reduced: 1.0, budget: 0.0 });
        assert_eq!(budget.exit_code(), 3);
        assert_eq!(CliError::Core(cranopt::Error::IllConditioned { a: 1.0, b: 1.0 }).exit_code(), 4);
        assert_eq!(invalid("x", "y").exit_code(), 2);
        assert_eq!(invalid("x", "y").record("pareto")["field"], "x");
    }
}
