//! Runs an experiment config and prints the table, as the `qsanov` binary does.
//!
//! `cargo run --release --example run_config -- examples/configs/sanov_bernoulli.json`

use qsanov::experiments::{run, write_records, ExperimentConfig};

fn main() -> qsanov::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/stein_bernoulli.json").into());
    let cfg = ExperimentConfig::load(&path)?;
    let exp = run(&cfg)?;
    write_records(std::io::stdout().lock(), &exp.records, &exp.columns, cfg.format)?;
    eprintln!("{} rows, all checks passed: {}", exp.records.len(), exp.passed());
    Ok(())
}
