use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pistonpipe_cli::checks::Suite;
use pistonpipe_cli::estimate::{bounds_decreasing, estimate_contact, sweep, ContactEstimate};
use pistonpipe_cli::run::{new_simulation, write_series};
use pistonpipe_cli::{load_config, run_command, RunError, ScenarioConfig};

/// Exit status for invalid configuration, usage and I/O errors.
const EXIT_USAGE: u8 = 1;
/// Exit status when a verification criterion fails.
const EXIT_VERIFY: u8 = 5;

#[derive(Parser)]
#[command(
    name = "pistonpipe",
    version,
    about = "Viscous gas column driven by a spring-loaded piston"
)]
struct Cli {
    /// Scenario configuration (INI). Without it the built-in defaults are used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override numerics.n_cells.
    #[arg(long, global = true)]
    cells: Option<usize>,
    /// Override numerics.dt_initial and numerics.dt_max.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Re-run in memory and fail unless the series is byte-identical.
    #[arg(long, global = true)]
    seed_free: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario and write the series, snapshots and summary.
    Run {
        /// Continue from a snapshot written by an earlier run of the same config.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Bound the contact/depletion time and compare with a coarse run.
    EstimateContact {
        /// Repeat for constant outflow speeds 0.1, 0.2, ..., 1.0.
        #[arg(long)]
        sweep: bool,
    },
    /// Run acceptance checks and print one line per criterion.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: Suite,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn configuration(cli: &Cli) -> Result<ScenarioConfig, RunError> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(n) = cli.cells {
        cfg.numerics.n_cells = n;
    }
    if let Some(dt) = cli.dt {
        cfg.numerics.dt_initial = dt;
        cfg.numerics.dt_max = dt;
    }
    cfg.numerics.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<ExitCode, RunError> {
    match &cli.command {
        Command::Run { resume } => {
            let cfg = configuration(cli)?;
            let summary = run_command(&cfg, &cli.out, resume.as_deref())?;
            println!(
                "{}",
                serde_json::to_string(&summary.event).expect("events serialize")
            );
            if cli.seed_free && resume.is_none() {
                check_reproducible(&cfg, &cli.out)?;
            }
            Ok(ExitCode::from(summary.exit_code as u8))
        }
        Command::EstimateContact { sweep: false } => {
            let cfg = configuration(cli)?;
            let est = estimate_contact(&cfg)?;
            print_estimate(None, &est);
            write_json(&cli.out, "contact_estimate.json", &est)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::EstimateContact { sweep: true } => {
            let cfg = configuration(cli)?;
            let rows = sweep(&cfg)?;
            for row in &rows {
                print_estimate(Some(row.u0), &row.estimate);
            }
            let decreasing = bounds_decreasing(&rows);
            println!("bounds decreasing in u0: {decreasing}");
            write_json(&cli.out, "contact_sweep.json", &rows)?;
            Ok(if decreasing {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFY)
            })
        }
        Command::Verify { suite } => {
            let mut failed = Vec::new();
            for check in suite.criteria() {
                let outcome = check();
                println!("{outcome}");
                if let Some(table) = &outcome.table {
                    for line in table.lines() {
                        println!("    {line}");
                    }
                }
                if !outcome.passed {
                    failed.push(format!("{} ({})", outcome.id, outcome.name));
                }
            }
            if failed.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("failed criteria: {}", failed.join(", "));
                Ok(ExitCode::from(EXIT_VERIFY))
            }
        }
    }
}

fn print_estimate(u0: Option<f64>, est: &ContactEstimate) {
    let fmt = |x: Option<f64>| x.map_or("none".to_string(), |t| format!("{t:.6}"));
    let prefix = u0.map_or(String::new(), |u| format!("u0 = {u:.1}: "));
    let bound = est
        .lower_bound
        .map_or("unbounded".to_string(), |b| format!("{b:.6}"));
    println!(
        "{prefix}lower bound {bound}, simulated event time {}, v_min estimate {}",
        fmt(est.event_time),
        fmt(est.v_min_estimate)
    );
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), RunError> {
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.into(),
        source,
    })?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).map_err(|source| RunError::Json {
        path: path.clone(),
        source,
    })?;
    std::fs::write(&path, text + "\n").map_err(|source| RunError::Io { path, source })
}

/// Reruns the configuration in memory and compares with the written series.
fn check_reproducible(cfg: &ScenarioConfig, out: &Path) -> Result<(), RunError> {
    let mut sim = new_simulation(cfg)?;
    sim.run();
    let mut again = Vec::new();
    write_series(&sim.series, &mut again)?;
    let path = out.join(&cfg.outputs.series);
    let written = std::fs::read(&path).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    if written != again {
        return Err(RunError::NotReproducible(format!(
            "{} differs from an identical rerun",
            path.display()
        )));
    }
    log::info!("rerun reproduced {} byte for byte", path.display());
    Ok(())
}
