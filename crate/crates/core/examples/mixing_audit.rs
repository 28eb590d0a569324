//! `α̂(l)` for three references and a Stein probe against a Markov chain.
//!
//! `cargo run --release --example mixing_audit`

use qsanov::neyman_pearson::hp_probe_with;
use qsanov::neyman_pearson::HpOptions;
use qsanov::source::{mixing_report, SourceModel};

fn main() -> qsanov::Result<()> {
    let ls: Vec<usize> = (1..=6).collect();
    let lazy = SourceModel::classical_markov(&[vec![0.75, 0.25], vec![0.25, 0.75]])?;
    for (name, m) in [
        ("iid", SourceModel::bernoulli(0.3)?),
        ("swap", SourceModel::classical_markov(&[vec![0.0, 1.0], vec![1.0, 0.0]])?),
        ("lazy", lazy.clone()),
    ] {
        let r = mixing_report(&m, &ls, 1)?;
        println!("{name:>5}: alpha = {:?} not *-mixing: {}", r.alpha, r.not_star_mixing());
    }

    let fair = SourceModel::bernoulli(0.5)?;
    let opts = HpOptions { tolerance: 0.1, ..HpOptions::default() };
    let hp = hp_probe_with(&fair, &lazy, 0.1, &[5, 10, 20], opts)?;
    println!("target {} verdict {:?}", hp.target, hp.verdict);
    for ((n, b), f) in hp.n_values.iter().zip(&hp.beta_over_n).zip(&hp.floor) {
        println!("  n = {n:>2}: beta/n = {:.5}, converse floor {:.5}", b.to_f64(), f.to_f64());
    }
    Ok(())
}
