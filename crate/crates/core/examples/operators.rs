//! Tensor powers, partial traces, entropies and the two-projection estimate.
//!
//! `cargo run --release --example operators`

use qsanov::divergence::{measured_relative_entropy_lb, relative_entropy, von_neumann_entropy};
use qsanov::operator::{
    hermitian_eig, lemma_mainest_check, partial_trace_state, support_projector, tensor_power, DensityOperator,
    HermitianOperator, Keep, DEFAULT_GROUPING_TOL,
};

fn main() -> qsanov::Result<()> {
    let rho = DensityOperator::new(HermitianOperator::from_real_rows(&[vec![0.7, 0.2], vec![0.2, 0.3]])?)?;
    let sigma = DensityOperator::from_diagonal(&[0.5, 0.5])?;
    let rho3 = tensor_power(&rho, 3)?;
    println!("dim rho^3 = {}, S(rho^3) = {:.6} = 3 x {:.6}", rho3.dim(), von_neumann_entropy(&rho3)?, von_neumann_entropy(&rho)?);

    let back = partial_trace_state(&rho3, 2, 4, Keep::Left)?;
    println!("Tr_23 rho^3 recovers rho: max diff {:.2e}", back.op().max_abs_diff(rho.op()));

    let spec = hermitian_eig(rho3.op(), DEFAULT_GROUPING_TOL)?;
    println!("distinct eigenvalues of rho^3: {:?}", spec.eigenvalues());
    for i in 0..spec.eigenvalues().len() {
        println!("  multiplicity {}", spec.multiplicity(i));
    }

    println!(
        "S(rho||sigma) = {}, pinched lower bound = {}",
        relative_entropy(&rho, &sigma)?,
        measured_relative_entropy_lb(&rho, &sigma)?
    );

    // u: top spectral projection of the reference; p, q: projections near rho.
    let tau = tensor_power(&sigma, 2)?;
    let u = support_projector(&tau.op().clone(), 1e-12)?;
    let p = hermitian_eig(tensor_power(&rho, 2)?.op(), DEFAULT_GROUPING_TOL)?.projection_where(|l| l > 0.05);
    let q = p.clone();
    let r = lemma_mainest_check(&tau, &p, &q, &u, None)?;
    println!(
        "two-projection estimate: slack {:.4} and {:.4}, holds: {}",
        r.slack1(),
        r.slack2(),
        r.holds(1e-9)
    );
    Ok(())
}
