//! Optimal tests between non-commuting qubit states and the converse bound.
//!
//! `cargo run --release --example quantum_neyman_pearson`

use qsanov::divergence::relative_entropy;
use qsanov::neyman_pearson::{converse_bound, np_projection_beta, np_relaxed_beta};
use qsanov::operator::{tensor_power, DensityOperator, HermitianOperator};

fn main() -> qsanov::Result<()> {
    let psi = DensityOperator::new(HermitianOperator::from_real_rows(&[vec![0.85, 0.2], vec![0.2, 0.15]])?)?;
    let phi = DensityOperator::new(HermitianOperator::from_real_rows(&[vec![0.4, -0.25], vec![-0.25, 0.6]])?)?;
    println!("[psi, phi] norm = {:.4}", psi.op().commutator_norm(phi.op()));
    let s = relative_entropy(&psi, &phi)?;
    println!("S(psi||phi) = {s}");

    let eps = 0.1;
    println!("{:>3} {:>10} {:>10} {:>10} {:>8}", "n", "relaxed/n", "proj/n", "floor/n", "alpha");
    for n in 1..=8 {
        let (pn, qn) = (tensor_power(&psi, n)?, tensor_power(&phi, n)?);
        let relaxed = np_relaxed_beta(&pn, &qn, eps)?;
        let (proj, projector) = np_projection_beta(&pn, &qn, eps)?;
        let floor = converse_bound(&pn, &qn, eps)?;
        println!(
            "{n:>3} {:>10.5} {:>10.5} {:>10.5} {:>8.5}   rank {}",
            relaxed.value.per(n as f64).to_f64(),
            proj.value.per(n as f64).to_f64(),
            floor.per(n as f64).to_f64(),
            proj.type1_error,
            projector.rank()
        );
    }
    Ok(())
}
