//! Concentration of the reference spectrum under the null state.
//!
//! `cargo run --release --example relative_aep`

use qsanov::source::SourceModel;
use qsanov::typicality::{relative_aep_mass, relative_center};

fn main() -> qsanov::Result<()> {
    let p = SourceModel::bernoulli(0.5)?;
    let q = SourceModel::bernoulli(0.25)?;
    println!("window center s(P) + s(P,Q) = {}", relative_center(&p, &q)?);
    for n in [64, 128, 256, 512] {
        let a = relative_aep_mass(&p, &q, n, 0.2)?;
        println!("n = {n:>4}: P-mass of the window = {:.10}", a.mass);
    }

    // Disjoint supports: the kernel of Q^(n) carries everything but 2^-n.
    let delta0 = SourceModel::classical_iid(&[1.0, 0.0])?;
    let a = relative_aep_mass(&p, &delta0, 10, 0.2)?;
    println!("against delta_0 at n = 10: center {}, mass {}", a.center, a.mass);
    Ok(())
}
