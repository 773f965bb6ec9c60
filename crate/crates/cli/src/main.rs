//! `dynprice`: run pricing scenarios, sweep horizons, verify trace properties
//! and emit regret reports.
//!
//! Exit codes: 0 success, 1 a property check failed, 2 configuration error,
//! 3 runtime error.

mod overrides;

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pricing_core::analysis::{
    approx_regret, best_fixed_price, build_report, fit_scaling_exponent, run_checks,
    static_regret, CheckKind, CheckOutcome, Objective, ReportOptions, DEFAULT_GRID_POINTS,
};
use pricing_core::equilibrium::tatonnement;
use pricing_core::sim::{read_run, run_scenario, scenario_supply, write_run, ScenarioConfig};
use pricing_core::Error;
use serde_json::Value;

#[derive(Parser)]
#[command(name = "dynprice", version, about = "Competitive dynamic pricing simulator")]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, env = "DYNPRICE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write the trace CSV plus a manifest.
    Run {
        config: PathBuf,
        /// Override a config field, e.g. `--set horizon=1000`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a scenario at several horizons and fit the regret exponent.
    Sweep {
        config: PathBuf,
        /// Comma-separated horizons.
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seller: usize,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Verify trace properties; exits 1 if any check fails.
    Check {
        /// Manifest written by `run`.
        manifest: PathBuf,
        /// Checks to run; all when omitted.
        properties: Vec<String>,
    },
    /// Solve for the equilibrium prices of a scenario's market.
    Equilibrium {
        config: PathBuf,
        /// Round whose supply vector is used.
        #[arg(long, default_value_t = 1)]
        round: usize,
        /// Explicit comma-separated supply vector.
        #[arg(long, value_delimiter = ',')]
        supply: Option<Vec<f64>>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Write per-seller regret CSVs and a JSON summary for a trace.
    Report {
        manifest: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::LogRevenue)]
        objective: ObjectiveArg,
        /// Skip the per-round equilibrium benchmark.
        #[arg(long)]
        no_dynamic: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    LogRevenue,
    Revenue,
}

enum Failure {
    Config(String),
    Runtime(String),
    Checks,
}

fn message(e: &Error) -> String {
    match e {
        Error::Config(msg) => msg.clone(),
        other => other.to_string(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(message(&e))
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn load_config(path: &Path, overrides: &[String]) -> CliResult<ScenarioConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut doc: Value = serde_json::from_str(&text).map_err(|e| {
        Failure::Config(format!(
            "{}: malformed JSON at line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    for o in overrides {
        overrides::apply(&mut doc, o).map_err(Failure::Config)?;
    }
    let config: ScenarioConfig = serde_json::from_value(doc)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    config
        .validate()
        .map_err(|e| Failure::Config(format!("{}: {}", path.display(), message(&e))))?;
    Ok(config)
}

fn resolve(out_dir: &Path, name: Option<&String>, default: &str) -> PathBuf {
    out_dir.join(name.map(String::as_str).unwrap_or(default))
}

fn cmd_run(out_dir: &Path, config: &Path, overrides: &[String]) -> CliResult {
    let config = load_config(config, overrides)?;
    let output = config.output.clone();
    let trace_path = resolve(out_dir, output.as_ref().and_then(|o| o.trace.as_ref()), "trace.csv");
    let manifest_path = resolve(
        out_dir,
        output.as_ref().and_then(|o| o.manifest.as_ref()),
        "manifest.json",
    );
    let trace = run_scenario(&config)?;
    for p in [&trace_path, &manifest_path] {
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir)?;
        }
    }
    write_run(&trace, &trace_path, &manifest_path)?;
    println!("rounds\t{}", trace.len());
    println!("trace\t{}", trace_path.display());
    println!("manifest\t{}", manifest_path.display());
    Ok(())
}

fn cmd_sweep(
    out_dir: &Path,
    config: &Path,
    horizons: &[usize],
    seller: usize,
    overrides: &[String],
) -> CliResult {
    let mut seen = BTreeSet::new();
    for &t in horizons {
        if t == 0 {
            return Err(Failure::Config("horizons must be positive".into()));
        }
        if !seen.insert(t) {
            return Err(Failure::Config(format!("duplicate horizon {t}")));
        }
    }
    let base = load_config(config, overrides)?;
    if seller >= base.n() {
        return Err(Failure::Config(format!(
            "seller {seller} out of range for {} sellers",
            base.n()
        )));
    }
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::Runtime(e.to_string()))?;
    w.write_record(["T", "regret", "approx_regret", "exponent"])
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for &t in horizons {
        let mut config = base.clone();
        config.horizon = t;
        config.validate()?;
        let trace = run_scenario(&config)?;
        let b = best_fixed_price(&trace, seller, DEFAULT_GRID_POINTS, Objective::LogRevenue)?;
        let regret = *static_regret(&trace, seller, b.log_price)?.last().unwrap();
        let approx = match &config.smoothing {
            Some(sp) => Some(*approx_regret(&trace, seller, b.log_price, sp)?.last().unwrap()),
            None => None,
        };
        points.push((t as f64, regret));
        let exponent = fit_scaling_exponent(&points).ok();
        let row = [
            t.to_string(),
            regret.to_string(),
            approx.map(|a| a.to_string()).unwrap_or_default(),
            exponent.map(|f| f.exponent.to_string()).unwrap_or_default(),
        ];
        w.write_record(&row).map_err(|e| Failure::Runtime(e.to_string()))?;
        rows.push(row.join(","));
    }
    w.flush()?;
    println!("T,regret,approx_regret,exponent");
    for r in rows {
        println!("{r}");
    }
    Ok(())
}

fn fmt_num(v: f64) -> String {
    format!("{v:.6e}")
}

fn print_checks(outcomes: &[CheckOutcome]) {
    println!("check\tseller\tstatus\tlhs\trhs\tslack\tnote");
    for o in outcomes {
        let seller = o.seller.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
        match &o.verdict {
            Some(v) => println!(
                "{}\t{seller}\t{}\t{}\t{}\t{}\t{}",
                o.check,
                if v.pass { "pass" } else { "FAIL" },
                fmt_num(v.lhs),
                fmt_num(v.rhs),
                fmt_num(v.slack),
                v.detail
            ),
            None => println!("{}\t{seller}\tskipped\t-\t-\t-\t{}", o.check, o.note),
        }
    }
}

fn load_run(manifest: &Path) -> CliResult<pricing_core::sim::Trace> {
    read_run(manifest).map_err(|e| match Failure::from(e) {
        Failure::Config(m) => Failure::Config(format!("{}: {m}", manifest.display())),
        Failure::Runtime(m) => Failure::Runtime(format!("{}: {m}", manifest.display())),
        f => f,
    })
}

fn cmd_check(manifest: &Path, properties: &[String]) -> CliResult {
    let selection: Vec<CheckKind> = properties
        .iter()
        .flat_map(|p| p.split(','))
        .filter(|p| !p.is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    let trace = load_run(manifest)?;
    let outcomes = run_checks(&trace, &selection)?;
    print_checks(&outcomes);
    if outcomes.iter().all(CheckOutcome::passed) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn cmd_equilibrium(
    config: &Path,
    round: usize,
    supply: Option<Vec<f64>>,
    overrides: &[String],
) -> CliResult {
    let config = load_config(config, overrides)?;
    let w = match supply {
        Some(w) => w,
        None => {
            if round == 0 || round > config.horizon {
                return Err(Failure::Config(format!(
                    "round {round} outside 1..={}",
                    config.horizon
                )));
            }
            scenario_supply(&config)?.at(round).to_vec()
        }
    };
    let eq = tatonnement(&config.model, &w, &config.equilibrium)?;
    let x = config.model.demand(eq.point.prices())?;
    println!("good\tprice\tdemand\tsupply");
    for (j, p) in eq.point.prices().iter().enumerate() {
        println!("{j}\t{p}\t{}\t{}", x[j], w[j]);
    }
    eprintln!("residual {:.3e} after {} iterations", eq.residual, eq.iterations);
    Ok(())
}

fn cmd_report(
    out_dir: &Path,
    manifest: &Path,
    grid: usize,
    objective: ObjectiveArg,
    no_dynamic: bool,
) -> CliResult {
    let trace = load_run(manifest)?;
    let opts = ReportOptions {
        grid_points: grid,
        objective: match objective {
            ObjectiveArg::LogRevenue => Objective::LogRevenue,
            ObjectiveArg::Revenue => Objective::Revenue,
        },
        dynamic: !no_dynamic,
    };
    fs::create_dir_all(out_dir)?;
    let checks = run_checks(&trace, &[])?;
    let mut summaries = Vec::new();
    for i in 0..trace.sellers() {
        let mut report = build_report(&trace, i, &opts)?;
        report.checks = checks
            .iter()
            .filter(|c| c.seller.is_none() || c.seller == Some(i))
            .cloned()
            .collect();
        let file = fs::File::create(out_dir.join(format!("report_seller{i}.csv")))?;
        report.write_csv(&trace, std::io::BufWriter::new(file))?;
        summaries.push(report.summary());
    }
    let mut text = serde_json::to_string_pretty(&summaries).map_err(Error::from)?;
    text.push('\n');
    fs::write(out_dir.join("report.json"), &text)?;
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out_dir.as_path();
    let result = match cli.command {
        Command::Run { config, overrides } => cmd_run(out, &config, &overrides),
        Command::Sweep {
            config,
            horizons,
            seller,
            overrides,
        } => cmd_sweep(out, &config, &horizons, seller, &overrides),
        Command::Check {
            manifest,
            properties,
        } => cmd_check(&manifest, &properties),
        Command::Equilibrium {
            config,
            round,
            supply,
            overrides,
        } => cmd_equilibrium(&config, round, supply, &overrides),
        Command::Report {
            manifest,
            grid,
            objective,
            no_dynamic,
        } => cmd_report(out, &manifest, grid, objective, no_dynamic),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => {
            eprintln!("error: one or more checks failed");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            ExitCode::from(3)
        }
    }
}
