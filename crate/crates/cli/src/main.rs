use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ucbtune_cli::config::ExperimentConfig;
use ucbtune_cli::runner::{run_experiment, EnvBlueprint};
use ucbtune_cli::sweep::{sweep_grid, write_sweep_outputs, SummaryTable};
use ucbtune_cli::{report, CliError, CliResult};

/// Contextual-bandit benchmark harness: LinUCB baselines plus online
/// exploration-learning meta-policies.
#[derive(Parser)]
#[command(name = "ucbtune", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured policy over the configured seeds, one per-round
    /// CSV log per seed
    Run {
        /// Experiment config (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Replace the config's seed list with this single seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides the config's run.out_dir)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores)
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run every grid value plus OPLINUCB and DOPLINUCB; emit the summary
    /// table, per-value results, and meta-policy results as CSV
    Sweep {
        /// Experiment config (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Replace the config's seed list with this single seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides the config's run.out_dir)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores)
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Aggregate per-round logs into per-policy plot data
    /// (t, mean/min/max cumulative regret over seeds)
    Report {
        /// Output directory (default: current directory)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-round log files produced by `run`
        #[arg(required = true)]
        logs: Vec<PathBuf>,
    },
}

fn set_jobs(jobs: Option<usize>) -> CliResult<()> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    Ok(())
}

fn ensure_out_dir(dir: &PathBuf) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))
}

fn cmd_run(
    config_path: PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
) -> CliResult<()> {
    set_jobs(jobs)?;
    let mut config = ExperimentConfig::from_path(&config_path)?;
    if let Some(s) = seed {
        config.run.seeds = vec![s];
    }
    config.validate_for_run()?;
    let out_dir = out.unwrap_or_else(|| PathBuf::from(&config.run.out_dir));
    ensure_out_dir(&out_dir)?;
    let blueprint = EnvBlueprint::from_config(&config)?;

    let mut finals = Vec::new();
    for &s in &config.run.seeds {
        let (path, final_regret) = run_experiment(&config, &blueprint, s, &out_dir)?;
        println!("seed {s}: final cumulative regret {final_regret} ({})", path.display());
        finals.push(final_regret);
    }
    let mean = finals.iter().sum::<f64>() / finals.len() as f64;
    println!("mean final cumulative regret over {} seed(s): {mean}", finals.len());
    Ok(())
}

fn cmd_sweep(
    config_path: PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
) -> CliResult<()> {
    set_jobs(jobs)?;
    let mut config = ExperimentConfig::from_path(&config_path)?;
    if let Some(s) = seed {
        config.run.seeds = vec![s];
    }
    config.validate_for_sweep()?;
    let out_dir = out.unwrap_or_else(|| PathBuf::from(&config.run.out_dir));
    ensure_out_dir(&out_dir)?;
    let blueprint = EnvBlueprint::from_config(&config)?;

    let result = sweep_grid(&config, &blueprint)?;
    let written = write_sweep_outputs(&config, &result, &out_dir)?;
    println!("{}", SummaryTable::csv_header());
    println!("{}", result.summary.csv_row());
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_report(out: Option<PathBuf>, logs: Vec<PathBuf>) -> CliResult<()> {
    let out_dir = out.unwrap_or_else(|| PathBuf::from("."));
    ensure_out_dir(&out_dir)?;
    let written = report::report(&logs, &out_dir)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            out,
            jobs,
        } => cmd_run(config, seed, out, jobs),
        Command::Sweep {
            config,
            seed,
            out,
            jobs,
        } => cmd_sweep(config, seed, out, jobs),
        Command::Report { out, logs } => cmd_report(out, logs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
