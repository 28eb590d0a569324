//! One projection separating a two-member null family from a reference.
//!
//! `cargo run --release --example sanov_slices`

use qsanov::divergence::kl_divergence;
use qsanov::source::SourceModel;
use qsanov::typicality::slice_sanov_projector;

fn main() -> qsanov::Result<()> {
    let omega = vec![SourceModel::bernoulli(0.3)?, SourceModel::bernoulli(0.7)?];
    let q = SourceModel::bernoulli(0.5)?;
    let s = kl_divergence(&[0.3, 0.7], &[0.5, 0.5])?;
    println!("s(Omega, Q) = {s}");
    for n in [128, 256, 512] {
        let sp = slice_sanov_projector(&omega, &q, n, 4, None)?;
        println!(
            "n = {n:>3}: member masses {:?}, (1/n) ln Q(p_n) = {:.5}, {} slices, eta = {}",
            sp.masses.values().map(|m| format!("{m:.4}")).collect::<Vec<_>>(),
            sp.ref_log_mass.to_f64(),
            sp.slices.len(),
            sp.spec.eta
        );
    }
    let sp = slice_sanov_projector(&omega, &q, 64, 4, None)?;
    println!("{}", serde_json::to_string_pretty(&sp.slices)?);
    Ok(())
}
