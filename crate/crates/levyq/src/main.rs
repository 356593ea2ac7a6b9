use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use levyq::cli::{self, CliError};

#[derive(Parser)]
#[command(
    name = "levyq",
    version,
    about = "Overflow undershoot/overshoot limit laws for Lévy-driven queues"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output artifacts (defaults: stdout only; samples need it).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: hardware parallelism). Output is identical
    /// for any value.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Regime classification and ladder constants as JSON.
    Analyze,
    /// Tabulate the limit law CCDF (and density when defined) as CSV.
    Limit,
    /// Draw overflow samples; writes samples.csv and a summary JSON.
    Simulate,
    /// Compare simulation against the limit law; exit code is the verdict.
    Compare,
    /// Sup-distance to the limit law along a ladder of barrier levels.
    Converge,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("levyq: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("levyq: {e}");
            ExitCode::from(cli::exit_code_for(&e))
        }
    }
}

fn run(args: &Args) -> Result<ExitCode, CliError> {
    let config_path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::InvalidConfig("--config PATH is required".into()))?;
    let cfg = cli::load_config(config_path)?;
    let base = config_path
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    let model = cli::resolve_model(&cfg, &base)?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
    }

    match args.command {
        Command::Analyze => {
            let report = cli::analyze_report(&model)?;
            let json = serde_json::to_string_pretty(&report)?;
            println!("{json}");
            if let Some(dir) = &args.out {
                fs::write(dir.join("analysis.json"), json)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Limit => {
            let rows = cli::limit_rows(&model, &cfg.limit.clone().unwrap_or_default())?;
            let mut buf = Vec::new();
            cli::write_limit_csv(&mut buf, &rows)?;
            print!("{}", String::from_utf8_lossy(&buf));
            if let Some(dir) = &args.out {
                fs::write(dir.join("limit.csv"), &buf)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate => {
            let sim_cfg = cfg.simulate.as_ref().ok_or_else(|| {
                CliError::InvalidConfig("simulate block missing from config".into())
            })?;
            let out = cli::simulate_run(&model, sim_cfg, args.seed)?;
            let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir)?;
            let mut buf = Vec::new();
            cli::write_samples_csv(&mut buf, &out.samples)?;
            fs::write(dir.join("samples.csv"), &buf)?;
            let json = serde_json::to_string_pretty(&out.summary)?;
            println!("{json}");
            fs::write(dir.join("summary.json"), json)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare => {
            let out = cli::compare_run(&model, &cfg, &base, args.seed)?;
            let json = serde_json::to_string_pretty(&out)?;
            println!("{json}");
            if let Some(dir) = &args.out {
                fs::write(dir.join("report.json"), &json)?;
                let mut buf = Vec::new();
                cli::write_residuals_csv(&mut buf, &out.report)?;
                fs::write(dir.join("residuals.csv"), &buf)?;
            }
            Ok(if out.report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Converge => {
            let rows = cli::converge_run(&model, &cfg, args.seed)?;
            let mut buf = Vec::new();
            cli::write_converge_csv(&mut buf, &rows)?;
            print!("{}", String::from_utf8_lossy(&buf));
            if let Some(dir) = &args.out {
                fs::write(dir.join("converge.csv"), &buf)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
