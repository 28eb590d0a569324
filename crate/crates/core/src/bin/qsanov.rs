use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qsanov::experiments::{run, write_records, ExperimentConfig, ExperimentKind, OutputFormat};

#[derive(Parser)]
#[command(name = "qsanov", version, about = "Run finite-blocklength hypothesis-testing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; defaults to the config's `out_path`, then stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long = "max-dim", global = true)]
    max_dim: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Suppress the summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    Stein,
    Sanov,
    Aep,
    Mixing,
    Stationary,
}

#[derive(ValueEnum, Clone, Copy)]
enum Format {
    Csv,
    Jsonl,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Stein => ExperimentKind::Stein,
            Command::Sanov => ExperimentKind::Sanov,
            Command::Aep => ExperimentKind::Aep,
            Command::Mixing => ExperimentKind::MixingAudit,
            Command::Stationary => ExperimentKind::Stationary,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: &Cli) -> qsanov::Result<bool> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| qsanov::Error::invalid("--config is required"))?;
    let mut cfg = ExperimentConfig::load(path)?;
    let kind = cli.command.kind();
    match cfg.kind {
        Some(k) if k != kind => {
            return Err(qsanov::Error::Config {
                path: "kind".into(),
                msg: format!("config is for `{}`, not `{}`", k.name(), kind.name()),
            })
        }
        _ => cfg.kind = Some(kind),
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(d) = cli.max_dim {
        cfg.max_dim = d;
    }
    if let Some(f) = cli.format {
        cfg.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Jsonl => OutputFormat::Jsonl,
        };
    }
    let exp = run(&cfg)?;
    let out = cli.out.clone().or_else(|| cfg.out_path.clone());
    match &out {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|e| qsanov::Error::io(p, e))?;
            let mut w = std::io::BufWriter::new(file);
            write_records(&mut w, &exp.records, &exp.columns, cfg.format)?;
            w.flush().map_err(|e| qsanov::Error::io(p, e))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            write_records(&mut w, &exp.records, &exp.columns, cfg.format)?;
            w.flush().map_err(|e| qsanov::Error::io("<stdout>", e))?;
        }
    }
    if !cli.quiet {
        let failed = exp.failures().count();
        eprintln!(
            "{}: {} rows, {} failed, config {}",
            kind.name(),
            exp.records.len(),
            failed,
            cfg.hash()
        );
        for r in exp.failures() {
            let gap = r.gap.map(|g| g.to_string()).unwrap_or_default();
            eprintln!("  FAIL n={} gap={gap}", r.n);
        }
    }
    Ok(exp.passed())
}
