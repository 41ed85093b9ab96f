use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qkff_cli::config::{ConfigError, ExperimentConfig, Format, MethodKind};
use qkff_cli::{load_config_with, output, runner, sweep, CliError};

/// Quantum Krylov fast-forwarding experiments.
#[derive(Parser)]
#[command(name = "qkff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact or Trotterized statevector evolution (`method` exact|trotter).
    Evolve(Common),
    /// QDavidson subspace and fast-forward.
    Qdavidson(Common),
    /// Multi-reference Krylov subspace and fast-forward.
    Mrk(Common),
    /// Multi-reference QDavidson subspace and fast-forward.
    Mrqd(Common),
    /// Required dimension per size and method.
    ScalingSweep(Common),
    /// Required dimension with exact versus Trotter chains.
    TrotterCompare(Common),
    /// Open-system propagation.
    Lindblad(Common),
}

#[derive(Args)]
struct Common {
    /// JSON or TOML experiment configuration; defaults apply without one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (overrides `output.format`).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Largest register with exact reference evolution (overrides `oracle_cap`).
    #[arg(long)]
    oracle_cap: Option<usize>,
    /// Worker threads for amplitude kernels and sweep cells.
    #[arg(long)]
    threads: Option<usize>,
}

fn prepare(common: &Common, command: &Command) -> Result<ExperimentConfig, CliError> {
    if let Some(k) = common.threads {
        if k == 0 {
            return Err(ConfigError::single("--threads", "must be at least 1").into());
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Threads(e.to_string()))?;
    }
    let adjust = |config: &mut ExperimentConfig| {
        if let Some(out) = &common.out {
            config.output.dir = out.clone();
        }
        if let Some(format) = common.format {
            config.output.format = format;
        }
        if let Some(cap) = common.oracle_cap {
            config.oracle_cap = cap;
        }
        match command {
            Command::Evolve(_) if !matches!(config.method, MethodKind::Exact | MethodKind::Trotter) => {
                config.method = MethodKind::Exact;
            }
            Command::Qdavidson(_) => config.method = MethodKind::Qdavidson,
            Command::Mrk(_) => config.method = MethodKind::Mrk,
            Command::Mrqd(_) => config.method = MethodKind::Mrqd,
            Command::Lindblad(_) => config.method = MethodKind::Lindblad,
            _ => {}
        }
    };
    let config = match &common.config {
        Some(path) => load_config_with(path, adjust)?,
        None => {
            let mut config = ExperimentConfig::default();
            adjust(&mut config);
            config
        }
    };
    validated(config, &common.config)
}

fn validated(config: ExperimentConfig, source: &Option<PathBuf>) -> Result<ExperimentConfig, CliError> {
    let issues = config.issues();
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError {
            source: source.clone(),
            issues,
        }
        .into())
    }
}

fn execute(command: Command) -> Result<usize, CliError> {
    let common = match &command {
        Command::Evolve(c)
        | Command::Qdavidson(c)
        | Command::Mrk(c)
        | Command::Mrqd(c)
        | Command::Lindblad(c)
        | Command::ScalingSweep(c)
        | Command::TrotterCompare(c) => c,
    };
    let config = prepare(common, &command)?;
    let dir = config.output.dir.clone();
    let cells = config.output.checkpoint.then(|| dir.join("cells"));
    match command {
        Command::ScalingSweep(_) => {
            let table = sweep::scaling_sweep(&config, cells.as_deref())?;
            output::write_sweep(&dir, &table)?;
            for r in &table.rows {
                eprintln!(
                    "n={} {}: {}",
                    r.n,
                    r.method,
                    r.required_dimension.map_or("unconverged".into(), |d| format!("dimension {d}"))
                );
            }
            Ok(table.unconverged())
        }
        Command::TrotterCompare(_) => {
            let table = sweep::trotter_compare(&config, cells.as_deref())?;
            output::write_compare(&dir, &table)?;
            Ok(table.unconverged())
        }
        _ => {
            let runs = runner::run(&config)?;
            output::write_runs(&dir, config.output.format, config.output.checkpoint, &runs)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(k) => {
            eprintln!("{k} sweep cell(s) did not reach the fidelity target");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
