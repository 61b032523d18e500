use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hoch_harness::config::{load, Overrides};
use hoch_harness::manifest::Status;
use hoch_harness::scenario::FormulationSpec;
use hoch_harness::suites::run_suite;
use hoch_harness::{run, with_workers, worker_count, HarnessError};

#[derive(Parser)]
#[command(name = "hoch", version, about = "Two-component higher-order Camassa-Holm simulator and verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and evaluate its diagnostics.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "L")]
        half_length: Option<f64>,
        #[arg(long)]
        tfinal: Option<f64>,
        #[arg(long)]
        cfl: Option<f64>,
        #[arg(long, value_parser = ["m", "nonlocal"])]
        formulation: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run one experiment suite.
    Suite {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Validate a configuration file.
    Check { file: PathBuf },
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::Skipped => "skip",
    }
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { config, preset, out, n, half_length, tfinal, cfl, formulation, workers } => {
            let overrides = Overrides {
                n,
                half_length,
                t_final: tfinal,
                cfl,
                formulation: formulation.as_deref().and_then(FormulationSpec::parse),
            };
            let scenario = load(&config, preset.as_deref(), &overrides)?;
            let workers = worker_count(workers)?;
            let dir = out.join(&scenario.name);
            let manifest = with_workers(workers, || run::run_scenario(&scenario, &dir))??;
            if let Some(b) = manifest.blow_up {
                println!("blow-up at t = {} (last valid t = {})", b.t, b.last_valid_t);
            }
            for c in &manifest.diagnostics {
                let value = c.value.map_or_else(|| "-".into(), |v| format!("{v:.3e}"));
                println!("{:>4}  {:<15} {value:>10}  {}", status_word(c.status), c.name, c.detail);
            }
            println!("wrote {}", dir.display());
            Ok(())
        }
        Command::Suite { name, out, workers } => {
            let workers = worker_count(workers)?;
            let report = run_suite(&name, &out, workers)?;
            for c in &report.checks {
                let value = c.value.map_or_else(|| "-".into(), |v| format!("{v:.3e}"));
                println!("{:>4}  {:<26} {value:>10}  {}", status_word(c.status), c.name, c.detail);
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Check { file } => {
            let scenario = load(&file, None, &Overrides::default())?;
            println!("ok: scenario `{}`", scenario.name);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
