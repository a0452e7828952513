use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vanlam_cli::commands::{self, Emitted, STRATEGIES};
use vanlam_cli::config::{ConfigError, ExperimentConfig};
use vanlam_cli::{exit, Failure};
use vanlam_core::bits::BitString;
use vanlam_core::construct::PairKind;

#[derive(Parser)]
#[command(
    name = "vanlam",
    version,
    about = "Desk-scale experiments on time-bounded randomness of interleaved sequences"
)]
struct Cli {
    /// Experiment config (TOML); the built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for report files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Budget name such as `n2*4`, or `unbounded`. Repeatable for `complexity`.
    #[arg(long, global = true)]
    budget: Vec<String>,
    /// Enumeration cap for `complexity`, pool cap for the betting commands.
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Accepted for scripting; every command is already deterministic.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive complexity of each target in a file, one per line.
    Complexity {
        targets: PathBuf,
        /// Conditional string given to every program.
        #[arg(long, default_value = "")]
        given: String,
    },
    /// Q_n and Q_{m,n} codes for (a⊎b), decoded under the budget.
    Compress {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Replays a named strategy and writes its transcript.
    MartingaleRun {
        #[arg(long, help = format!("one of: {STRATEGIES}"))]
        strategy: String,
        /// String to bet on.
        x: String,
        /// Oracle for lookahead strategies that read one.
        #[arg(long)]
        oracle: Option<String>,
    },
    /// Builds a counterexample pair, or replays a stored one.
    BuildPair {
        #[arg(long, default_value = "incompressibility")]
        kind: PairKind,
        /// Replay the certificates of this artifact instead of building.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Runs every acceptance criterion.
    Suite,
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    Ok(match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    })
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|source| {
        ConfigError::Io {
            path: path.display().to_string(),
            source,
        }
        .into()
    })
}

fn bits(flag: &str, s: &str) -> Result<BitString, Failure> {
    s.parse()
        .map_err(|e| Failure::Config(format!("{flag}: {e}")))
}

fn single_budget(
    cli: &Cli,
    cfg: &ExperimentConfig,
) -> Result<vanlam_core::machine::ExecBudget, Failure> {
    match cli.budget.as_slice() {
        [] => Ok(cfg.budget()?),
        [name] => commands::parse_budget(name)?
            .ok_or_else(|| Failure::Config("--budget: this command needs a finite budget".into())),
        _ => Err(Failure::Config(
            "--budget: give at most one budget for this command".into(),
        )),
    }
}

fn emit(out: Option<&Path>, files: &[Emitted]) -> Result<(), Failure> {
    match out {
        Some(dir) => commands::write_files(dir, files),
        None => {
            let mut stdout = std::io::stdout().lock();
            for (_, body) in files {
                stdout
                    .write_all(body.as_bytes())
                    .map_err(|e| Failure::Internal(e.to_string()))?;
            }
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let mut cfg = load_config(cli.config.as_deref())?;
    let pool_cap = cli.cap.unwrap_or(cfg.caps.pool);
    let files = match &cli.command {
        Command::Complexity { targets, given } => {
            if let Some(cap) = cli.cap {
                cfg.caps.enumeration = cap;
                cfg.validate()?;
            }
            let targets = commands::parse_targets(&read(targets)?)?;
            let budgets = if cli.budget.is_empty() {
                vec![None, Some(cfg.budget()?)]
            } else {
                cli.budget
                    .iter()
                    .map(|b| commands::parse_budget(b))
                    .collect::<Result<_, _>>()?
            };
            commands::complexity_report(&cfg, &targets, &bits("--given", given)?, &budgets)?
        }
        Command::Compress { a, b, n, m } => {
            let budget = single_budget(cli, &cfg)?;
            commands::compress(&cfg, &bits("--a", a)?, &bits("--b", b)?, *n, *m, &budget)?
        }
        Command::MartingaleRun {
            strategy,
            x,
            oracle,
        } => {
            let oracle = oracle.as_deref().map(|o| bits("--oracle", o)).transpose()?;
            commands::martingale_run(&cfg, strategy, &bits("x", x)?, oracle.as_ref(), pool_cap)?
        }
        Command::BuildPair { kind, replay } => match replay {
            Some(path) => commands::replay_pair(&cfg, &read(path)?)?,
            None => commands::build_pair(&cfg, *kind, pool_cap)?,
        },
        Command::Suite => {
            let report = commands::suite(&cfg)?;
            if let Some(dir) = &cli.out {
                commands::write_files(dir, &report.files)?;
            }
            print!("{}", commands::suite_lines(&report));
            if report.failed() {
                return Err(Failure::Criterion("at least one criterion failed".into()));
            }
            return Ok(());
        }
    };
    emit(cli.out.as_deref(), &files)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::from(exit::PASS as u8),
        Err(e) => {
            eprintln!("vanlam: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
