use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use taylor_moments::job::{self, JobConfig};
use taylor_moments::Error;

#[derive(Parser)]
#[command(version, about = "Compare Taylor, trace-rule and Monte Carlo means of f(x)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run the estimators listed in the job's `methods`.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mc_count: Option<u64>,
    },
    /// Scan the small-dispersion limit B = alpha * rho.
    Bridge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn run(cli: Cli) -> Result<String, Error> {
    match cli.command {
        Command::Estimate {
            config,
            format,
            seed,
            mc_count,
        } => {
            let mut job = JobConfig::load(&config)?;
            if let Some(s) = seed {
                job.seed = s;
            }
            if let Some(c) = mc_count {
                job.mc_count = c;
            }
            let report = job::run_estimate(&job)?;
            Ok(match format {
                Format::Json => job::to_json(&report),
                Format::Text => report.to_text(),
            })
        }
        Command::Bridge { config, format } => {
            let report = job::run_bridge(&JobConfig::load(&config)?)?;
            Ok(match format {
                Format::Json => job::to_json(&report),
                Format::Text => report.to_text(),
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let cat = e.category();
            eprintln!("error[{}]: {e}", cat.as_str());
            ExitCode::from(cat.exit_code())
        }
    }
}
