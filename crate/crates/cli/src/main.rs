use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sgq_core::pipeline::{run, Mode, Module, Outcome, PipelineConfig, PipelineError};

/// Geometric quantization of Poisson structures through symplectic groupoids.
#[derive(Parser)]
#[command(name = "sgq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole recipe and write the report.
    Quantize {
        config: PathBuf,
        /// Report path; defaults to `outputs.report`, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites and print the report.
    Check {
        config: PathBuf,
        /// Restrict to one suite: poisson, groupoid, potential, polarization,
        /// twist, reduction, algebra or deformation.
        #[arg(long)]
        only: Option<String>,
    },
    /// Deformation sweep over the ħ grid, written as CSV.
    Sweep {
        config: PathBuf,
        /// CSV path; defaults to `outputs.csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn io_err(path: &Path, e: io::Error) -> PipelineError {
    PipelineError::Io(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<PipelineConfig, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    PipelineConfig::from_json_str(&text)
}

/// Config-relative paths resolve against the config's directory.
fn relative_to(config: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config.parent().unwrap_or(Path::new(".")).join(p)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn write_report(outcome: &Outcome, path: Option<&Path>) -> Result<(), PipelineError> {
    let text = outcome.report.render();
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| PipelineError::Io(e.to_string())),
    }
}

fn execute(cli: Cli) -> Result<i32, PipelineError> {
    match cli.command {
        Command::Quantize { config, out } => {
            let cfg = load(&config)?;
            let outcome = run(&cfg, Mode::Quantize)?;
            let report = out.or_else(|| cfg.outputs.report.as_ref().map(|p| relative_to(&config, p)));
            write_report(&outcome, report.as_deref())?;
            if let (Some(path), Some(rep)) = (&cfg.outputs.matrices, &outcome.matrices) {
                let path = relative_to(&config, path);
                rep.write_csv(create(&path)?)?;
            }
            Ok(outcome.exit_code())
        }
        Command::Check { config, only } => {
            let only = only
                .map(|m| Module::parse(&m).ok_or_else(|| PipelineError::Schema(format!("unknown module {m:?}"))))
                .transpose()?;
            let cfg = load(&config)?;
            let outcome = run(&cfg, Mode::Check { only })?;
            write_report(&outcome, None)?;
            Ok(outcome.exit_code())
        }
        Command::Sweep { config, csv } => {
            let cfg = load(&config)?;
            let path = csv
                .or_else(|| cfg.outputs.csv.as_ref().map(|p| relative_to(&config, p)))
                .ok_or_else(|| PipelineError::Schema("sweep needs --csv or outputs.csv".into()))?;
            let outcome = run(&cfg, Mode::Sweep)?;
            if let Some(s) = &outcome.sweep {
                s.write_csv(create(&path)?)?;
            }
            write_report(&outcome, None)?;
            Ok(outcome.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("sgq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
