//! Stein exponent of two Bernoulli sources from exact type classes.
//!
//! `cargo run --release --example classical_stein`

use qsanov::divergence::relative_entropy_rate;
use qsanov::neyman_pearson::{classical_beta_bruteforce, classical_beta_iid_types};
use qsanov::source::{marginal_distribution, SourceModel};

fn main() -> qsanov::Result<()> {
    let p = SourceModel::bernoulli(0.5)?;
    let q = SourceModel::bernoulli(0.25)?;
    let eps = 0.1;
    let target = -relative_entropy_rate(&p, &q, 8)?.value;
    println!("target -s(P,Q) = {target}");

    // Tiny n: the randomized optimum lies below the best subset, found here
    // by enumerating all 2^16 of them.
    let n = 4;
    let brute = classical_beta_bruteforce(&marginal_distribution(&p, n)?, &marginal_distribution(&q, n)?, eps)?;
    let types = classical_beta_iid_types(&p, &q, n, eps)?;
    println!(
        "n = {n}: relaxed {:.6} <= best subset {:.6} <= likelihood-ordered subset {:.6}",
        types.relaxed.value.to_f64(),
        brute.value.to_f64(),
        types.deterministic.value.to_f64()
    );

    println!("{:>6} {:>12} {:>12} {:>10}", "n", "relaxed/n", "subset/n", "gap");
    for n in [16, 64, 256, 1024, 4096] {
        let b = classical_beta_iid_types(&p, &q, n, eps)?;
        let relaxed = b.relaxed.value.per(n as f64);
        println!(
            "{n:>6} {:>12.6} {:>12.6} {:>10.6}",
            relaxed.to_f64(),
            b.deterministic.value.per(n as f64).to_f64(),
            relaxed.distance(target)
        );
    }
    Ok(())
}
