use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sgdsamp_cli::commands::{self, Workbench};
use sgdsamp_cli::config::{resolve_output_dir, ExperimentConfig};
use sgdsamp_cli::dataset::SyntheticTask;

#[derive(Parser)]
#[command(
    name = "sgdsamp",
    version,
    about = "SGD under arbitrary sampling: constants, stepsize plans, batch-size planning and experiment runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and write it as a LIBSVM file.
    Gen {
        /// Problem family the data is meant for.
        #[arg(long, value_enum)]
        task: TaskArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the constants report (smoothness, noise, stepsize, tau*)
    /// for every scheme in the config.
    Constants {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (falls back to the config, then
        /// SGDSAMP_OUTPUT_DIR, then the working directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured SGD variants and write error trajectories.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also emit SVG charts next to the CSVs.
        #[arg(long, default_value_t = false)]
        svg: bool,
    },
    /// Emit stepsize/total-complexity tables over the batch size and the
    /// switching-time study.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = false)]
        svg: bool,
    },
    /// Run the oracle battery and report pass/fail per check.
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum TaskArg {
    Ridge,
    Logistic,
    Nonconvex,
}

impl From<TaskArg> for SyntheticTask {
    fn from(value: TaskArg) -> Self {
        match value {
            TaskArg::Ridge => SyntheticTask::Ridge,
            TaskArg::Logistic => SyntheticTask::Logistic,
            TaskArg::Nonconvex => SyntheticTask::Nonconvex,
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Gen {
            task,
            n,
            d,
            seed,
            out,
        } => {
            commands::gen::run(task.into(), n, d, seed, &out)?;
            Ok(true)
        }
        Command::Constants { config, out } => {
            let config = ExperimentConfig::from_path(&config)?;
            let workbench = Workbench::from_config(config, out.as_deref())?;
            commands::constants::run(&workbench)?;
            Ok(true)
        }
        Command::Run { config, out, svg } => {
            let config = ExperimentConfig::from_path(&config)?;
            let workbench = Workbench::from_config(config, out.as_deref())?;
            commands::run::run(&workbench, svg)?;
            Ok(true)
        }
        Command::Sweep { config, out, svg } => {
            let config = ExperimentConfig::from_path(&config)?;
            let workbench = Workbench::from_config(config, out.as_deref())?;
            commands::sweep::run(&workbench, svg)?;
            Ok(true)
        }
        Command::Verify { seed, out } => {
            let out_dir = resolve_output_dir(out.as_deref(), None);
            commands::verify::run(seed, &out_dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::FAILURE
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
