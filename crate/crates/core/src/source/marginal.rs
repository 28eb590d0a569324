use super::{SourceModel};
use crate::operator::{
    checked_pow, partial_trace, tensor_power_within, DensityOperator, HermitianOperator, Keep,
    DEFAULT_DIM_GUARD,
};
use crate::{Error, Result};

/// Largest outcome space enumerated by [`marginal_distribution`].
pub const MAX_CLASSICAL_OUTCOMES: usize = 1 << 24;

const CONSISTENCY_TOL: f64 = 1e-8;

/// `n`-site marginal under the default dimension guard.
pub fn marginal_density(m: &SourceModel, n: usize) -> Result<DensityOperator> {
    marginal_density_within(m, n, DEFAULT_DIM_GUARD)
}

pub fn marginal_density_within(m: &SourceModel, n: usize, max_dim: usize) -> Result<DensityOperator> {
    if n == 0 {
        return Err(Error::invalid("marginals need n >= 1"));
    }
    let dim = checked_pow(m.site().dim, n);
    if dim > max_dim as u128 {
        return Err(Error::DimensionGuard { dim, guard: max_dim });
    }
    match m {
        SourceModel::ClassicalIid(_) | SourceModel::ClassicalMarkov(_) => {
            let p = marginal_distribution(m, n)?;
            Ok(DensityOperator::new_unchecked(HermitianOperator::from_diag_unchecked(&p)))
        }
        SourceModel::QuantumIid(rho) => tensor_power_within(rho, n, max_dim),
        SourceModel::QuantumBlockIid(b) => {
            let (full, rest) = (n / b.block_len(), n % b.block_len());
            let mut acc = tensor_power_within(b.rho(), full, max_dim)?;
            if rest > 0 {
                let head = partial_trace(
                    b.rho().op(),
                    checked_pow(b.site_dim(), rest) as usize,
                    checked_pow(b.site_dim(), b.block_len() - rest) as usize,
                    Keep::Left,
                )?;
                let head = DensityOperator::new_unchecked(head);
                acc = DensityOperator::new_unchecked(crate::operator::tensor_product_within(
                    acc.op(),
                    head.op(),
                    max_dim,
                )?);
            }
            Ok(acc)
        }
        SourceModel::FiniteMixture(mix) => {
            if m.is_classical() {
                let p = marginal_distribution(m, n)?;
                return Ok(DensityOperator::new_unchecked(HermitianOperator::from_diag_unchecked(&p)));
            }
            let parts = mix
                .components()
                .iter()
                .map(|c| marginal_density_within(c, n, max_dim))
                .collect::<Result<Vec<_>>>()?;
            DensityOperator::mixture(mix.weights(), &parts)
        }
    }
}

/// Probabilities of all `d^n` strings, first site most significant.
pub fn marginal_distribution(m: &SourceModel, n: usize) -> Result<Vec<f64>> {
    if !m.is_classical() {
        return Err(Error::Unsupported(format!(
            "{} has no classical marginal distribution",
            m.label()
        )));
    }
    if n == 0 {
        return Err(Error::invalid("marginals need n >= 1"));
    }
    let size = checked_pow(m.site().dim, n);
    if size > MAX_CLASSICAL_OUTCOMES as u128 {
        return Err(Error::DimensionGuard {
            dim: size,
            guard: MAX_CLASSICAL_OUTCOMES,
        });
    }
    if let SourceModel::FiniteMixture(mix) = m {
        let mut out = vec![0.0; size as usize];
        for (w, c) in mix.weights().iter().zip(mix.components()) {
            if *w == 0.0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(marginal_distribution(c, n)?) {
                *o += w * x;
            }
        }
        return Ok(out);
    }
    let chain = m.as_markov().expect("classical non-mixture model");
    let d = chain.states();
    let mut p = chain.pi().to_vec();
    for _ in 1..n {
        let mut next = Vec::with_capacity(p.len() * d);
        for (idx, &w) in p.iter().enumerate() {
            let row = chain.row(idx % d);
            next.extend(row.iter().map(|t| w * t));
        }
        p = next;
    }
    Ok(p)
}

/// Shift invariance at level `n`: both one-site reductions of the
/// `(n+1)`-site marginal must reproduce the `n`-site marginal.
pub fn stationarity_check(m: &SourceModel, n: usize) -> Result<bool> {
    let d = m.site().dim;
    if m.is_classical() {
        let small = marginal_distribution(m, n)?;
        let big = marginal_distribution(m, n + 1)?;
        let mut drop_last = vec![0.0; small.len()];
        let mut drop_first = vec![0.0; small.len()];
        for (idx, &x) in big.iter().enumerate() {
            drop_last[idx / d] += x;
            drop_first[idx % small.len()] += x;
        }
        let ok = |v: &[f64]| v.iter().zip(&small).all(|(a, b)| (a - b).abs() <= CONSISTENCY_TOL);
        return Ok(ok(&drop_last) && ok(&drop_first));
    }
    let small = marginal_density(m, n)?;
    let big = marginal_density(m, n + 1)?;
    let dn = small.dim();
    let left = partial_trace(big.op(), dn, d, Keep::Left)?;
    let right = partial_trace(big.op(), d, dn, Keep::Right)?;
    Ok(left.max_abs_diff(small.op()) <= CONSISTENCY_TOL && right.max_abs_diff(small.op()) <= CONSISTENCY_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::MarkovChain;

    fn diag(m: &DensityOperator) -> Vec<f64> {
        m.op().diag()
    }

    #[test]
    fn symmetric_chain_is_uniform() {
        let m = SourceModel::classical_markov(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(diag(&marginal_density(&m, 2).unwrap()), vec![0.25; 4]);
    }

    #[test]
    fn asymmetric_chain_path_probabilities() {
        let m = SourceModel::classical_markov(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let d = diag(&marginal_density(&m, 2).unwrap());
        let expect = [0.6, 2.0 / 30.0, 2.0 / 30.0, 0.8 / 3.0];
        for (a, b) in d.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn mixture_is_convex_combination() {
        let m = SourceModel::finite_mixture(
            &[0.5, 0.5],
            vec![SourceModel::bernoulli(1.0).unwrap(), SourceModel::bernoulli(0.5).unwrap()],
        )
        .unwrap();
        assert_eq!(diag(&marginal_density(&m, 1).unwrap()), vec![0.75, 0.25]);
    }

    #[test]
    fn iid_distributions() {
        let fair = SourceModel::bernoulli(0.5).unwrap();
        assert_eq!(marginal_distribution(&fair, 3).unwrap(), vec![0.125; 8]);
        let biased = SourceModel::bernoulli(0.75).unwrap();
        assert_eq!(
            marginal_distribution(&biased, 2).unwrap(),
            vec![0.5625, 0.1875, 0.1875, 0.0625]
        );
        let q = SourceModel::quantum_iid(DensityOperator::maximally_mixed(2));
        assert!(marginal_distribution(&q, 2).is_err());
    }

    #[test]
    fn binary_alphabet_to_24_sites() {
        let m = SourceModel::bernoulli(0.5).unwrap();
        assert_eq!(marginal_distribution(&m, 24).unwrap().len(), 1 << 24);
        assert!(matches!(marginal_distribution(&m, 25), Err(Error::DimensionGuard { .. })));
    }

    #[test]
    fn block_state_partial_block() {
        let a = DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap();
        let b = DensityOperator::from_diagonal(&[0.2, 0.8]).unwrap();
        let ab = crate::operator::tensor_product(a.op(), b.op()).unwrap();
        let m = SourceModel::quantum_block_iid(DensityOperator::new(ab).unwrap(), 2).unwrap();
        let m3 = marginal_density(&m, 3).unwrap();
        // a ⊗ b ⊗ a
        let d = diag(&m3);
        assert!((d[0] - 0.9 * 0.2 * 0.9).abs() < 1e-15);
        assert!((d[7] - 0.1 * 0.8 * 0.1).abs() < 1e-15);
        // not shift invariant: the site pattern alternates
        assert!(!stationarity_check(&m, 1).unwrap());
    }

    #[test]
    fn stationarity() {
        let m = SourceModel::classical_markov(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        assert!(stationarity_check(&m, 3).unwrap());
        let q = SourceModel::quantum_iid(DensityOperator::pure_real(&[0.6, 0.8]).unwrap());
        assert!(stationarity_check(&q, 2).unwrap());
        let bad = MarkovChain::unchecked(&[0.5, 0.5], &[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        assert!(!stationarity_check(&SourceModel::ClassicalMarkov(bad), 2).unwrap());
    }

    #[test]
    fn guard_applies_to_dense_marginals() {
        let m = SourceModel::bernoulli(0.5).unwrap();
        assert!(matches!(marginal_density(&m, 13), Err(Error::DimensionGuard { .. })));
        assert_eq!(marginal_density(&m, 12).unwrap().dim(), 4096);
    }
}
