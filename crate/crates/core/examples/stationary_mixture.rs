//! A stationary, non-ergodic null state: half all-zeros, half fair coin.
//!
//! `cargo run --release --example stationary_mixture`

use qsanov::divergence::{overline_s, underline_s};
use qsanov::neyman_pearson::beta_relaxed;
use qsanov::operator::DEFAULT_DIM_GUARD;
use qsanov::source::{ergodic_components, SourceModel};
use qsanov::typicality::universal_typical_projector;

fn main() -> qsanov::Result<()> {
    let zeros = SourceModel::classical_iid(&[1.0, 0.0])?;
    let fair = SourceModel::bernoulli(0.5)?;
    let psi = SourceModel::finite_mixture(&[0.5, 0.5], vec![zeros, fair.clone()])?;
    println!("ergodic components: {}", ergodic_components(&psi, 1)?.summary_json());

    let low = underline_s(&psi, &fair, 1, 8)?;
    let high = overline_s(&psi, 1)?;
    println!("essinf s(Xi, Phi) = {low}, esssup s(Xi) = {high}");

    let comps = ergodic_components(&psi, 1)?.components;
    for n in [64, 256, 512] {
        let beta = beta_relaxed(&psi, &fair, n, 0.1, DEFAULT_DIM_GUARD)?;
        let u = universal_typical_projector(&comps, n, high.to_f64() + 0.05, 0.05)?;
        println!(
            "n = {n:>3}: beta/n = {:.5}, universal log-rank/n = {:.5}, masses {:?}",
            beta.per(n as f64).to_f64(),
            u.log_rank.per(n as f64).to_f64(),
            u.masses
        );
    }
    Ok(())
}
