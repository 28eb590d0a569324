use super::{marginal_distribution, MarkovChain, SourceModel};
use crate::operator::{
    checked_pow, partial_trace, tensor_power_within, DensityOperator, Keep, DEFAULT_DIM_GUARD,
};
use crate::{Error, Result};

/// Regroups the process into blocks of `l` consecutive sites, each block
/// becoming one site of the new model.
pub fn block_transform(m: &SourceModel, l: usize) -> Result<SourceModel> {
    if l == 0 {
        return Err(Error::invalid("block length must be positive"));
    }
    if l == 1 {
        return Ok(m.clone());
    }
    match m {
        SourceModel::ClassicalIid(_) => {
            guard_states(m.site().dim, l)?;
            SourceModel::classical_iid(&marginal_distribution(m, l)?)
        }
        SourceModel::ClassicalMarkov(c) => {
            guard_states(c.states(), l)?;
            Ok(SourceModel::ClassicalMarkov(block_chain(c, l, None)?))
        }
        SourceModel::QuantumIid(rho) => Ok(SourceModel::QuantumIid(tensor_power_within(rho, l, DEFAULT_DIM_GUARD)?)),
        SourceModel::QuantumBlockIid(b) => {
            if l % b.block_len() != 0 {
                return Err(Error::invalid(format!(
                    "block length {l} is not a multiple of the state's block length {}",
                    b.block_len()
                )));
            }
            let rho = tensor_power_within(b.rho(), l / b.block_len(), DEFAULT_DIM_GUARD)?;
            Ok(SourceModel::QuantumIid(rho))
        }
        SourceModel::FiniteMixture(mix) => {
            let comps = mix
                .components()
                .iter()
                .map(|c| block_transform(c, l))
                .collect::<Result<Vec<_>>>()?;
            SourceModel::finite_mixture(mix.weights(), comps)
        }
    }
}

fn guard_states(d: usize, l: usize) -> Result<()> {
    let dim = checked_pow(d, l);
    if dim > DEFAULT_DIM_GUARD as u128 {
        Err(Error::DimensionGuard {
            dim,
            guard: DEFAULT_DIM_GUARD,
        })
    } else {
        Ok(())
    }
}

/// The chain of `l`-blocks. With `start` given, the initial distribution
/// is the chain conditioned on its first site lying in that set.
pub(crate) fn block_chain(c: &MarkovChain, l: usize, start: Option<&[usize]>) -> Result<MarkovChain> {
    let d = c.states();
    let size = checked_pow(d, l) as usize;
    let mut head = vec![0.0; d];
    match start {
        None => head.copy_from_slice(c.pi()),
        Some(set) => {
            let mass: f64 = set.iter().map(|&i| c.pi()[i]).sum();
            if mass <= 0.0 {
                return Err(Error::invalid("conditioning set has zero stationary mass"));
            }
            for &i in set {
                head[i] = c.pi()[i] / mass;
            }
        }
    }
    // P(x_2..x_l | x_1) for every block, first site most significant
    let tail = |block: usize| -> f64 {
        let mut digits = vec![0usize; l];
        let mut b = block;
        for k in (0..l).rev() {
            digits[k] = b % d;
            b /= d;
        }
        digits.windows(2).map(|w| c.t(w[0], w[1])).product()
    };
    let tails: Vec<f64> = (0..size).map(tail).collect();
    let stride = size / d;
    let pi: Vec<f64> = (0..size).map(|b| head[b / stride] * tails[b]).collect();
    let rows: Vec<Vec<f64>> = (0..size)
        .map(|from| {
            let last = from % d;
            (0..size).map(|to| c.t(last, to / stride) * tails[to]).collect()
        })
        .collect();
    MarkovChain::with_stationary(&pi, &rows)
}

/// Traces out the first `l` sites of every `(l + mm)`-block.
pub fn restrict_tail(m: &SourceModel, l: usize, mm: usize) -> Result<SourceModel> {
    if mm == 0 {
        return Err(Error::invalid("kept tail must have at least one site"));
    }
    if l == 0 {
        return Ok(m.clone());
    }
    let SourceModel::QuantumBlockIid(b) = m else {
        return Err(Error::Unsupported(format!(
            "restriction needs a block state, got {}",
            m.label()
        )));
    };
    if b.block_len() != l + mm {
        return Err(Error::invalid(format!(
            "block length {} does not split as {l} + {mm}",
            b.block_len()
        )));
    }
    let s = b.site_dim();
    let tail = partial_trace(
        b.rho().op(),
        checked_pow(s, l) as usize,
        checked_pow(s, mm) as usize,
        Keep::Right,
    )?;
    let rho = DensityOperator::new_unchecked(tail);
    if mm == 1 {
        Ok(SourceModel::QuantumIid(rho))
    } else {
        SourceModel::quantum_block_iid(rho, mm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{tensor_product, HermitianOperator};
    use crate::source::marginal_density;

    #[test]
    fn quantum_iid_blocks_to_tensor_square() {
        let rho = DensityOperator::pure_real(&[0.6, 0.8]).unwrap();
        let SourceModel::QuantumIid(b) = block_transform(&SourceModel::quantum_iid(rho.clone()), 2).unwrap() else {
            panic!()
        };
        let sq = tensor_product(rho.op(), rho.op()).unwrap();
        assert!(b.op().max_abs_diff(&sq) < 1e-15);
    }

    #[test]
    fn blocked_markov_matches_parent() {
        let m = SourceModel::classical_markov(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let blocked = block_transform(&m, 2).unwrap();
        for steps in 1..=3 {
            let a = marginal_distribution(&blocked, steps).unwrap();
            let b = marginal_distribution(&m, 2 * steps).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_block_is_identity() {
        let m = SourceModel::bernoulli(0.3).unwrap();
        let b = block_transform(&m, 1).unwrap();
        assert_eq!(marginal_distribution(&b, 3).unwrap(), marginal_distribution(&m, 3).unwrap());
    }

    #[test]
    fn product_block_restricts_to_second_factor() {
        let a = DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap();
        let b = DensityOperator::pure_real(&[0.6, 0.8]).unwrap();
        let ab = DensityOperator::new(tensor_product(a.op(), b.op()).unwrap()).unwrap();
        let m = SourceModel::quantum_block_iid(ab, 2).unwrap();
        let SourceModel::QuantumIid(r) = restrict_tail(&m, 1, 1).unwrap() else {
            panic!()
        };
        assert!(r.op().max_abs_diff(b.op()) < 1e-15);
    }

    #[test]
    fn bell_block_restricts_to_maximally_mixed() {
        let h = 0.5f64;
        let bell = HermitianOperator::from_real_rows(&[
            vec![h, 0.0, 0.0, h],
            vec![0.0; 4],
            vec![0.0; 4],
            vec![h, 0.0, 0.0, h],
        ])
        .unwrap();
        let m = SourceModel::quantum_block_iid(DensityOperator::new(bell).unwrap(), 2).unwrap();
        let SourceModel::QuantumIid(r) = restrict_tail(&m, 1, 1).unwrap() else {
            panic!()
        };
        assert!(r.op().max_abs_diff(DensityOperator::maximally_mixed(2).op()) < 1e-15);
        assert!(matches!(restrict_tail(&m, 0, 2).unwrap(), SourceModel::QuantumBlockIid(_)));
        assert!(restrict_tail(&m, 1, 2).is_err());
    }

    #[test]
    fn restricted_marginals_are_partial_traces() {
        let rho = DensityOperator::mixture(
            &[0.5, 0.5],
            &[
                DensityOperator::pure_real(&[0.6, 0.0, 0.0, 0.8, 0.0, 0.0, 0.0, 0.0]).unwrap(),
                DensityOperator::maximally_mixed(8),
            ],
        )
        .unwrap();
        let m = SourceModel::quantum_block_iid(rho.clone(), 3).unwrap();
        let r = restrict_tail(&m, 1, 2).unwrap();
        let expect = partial_trace(rho.op(), 2, 4, Keep::Right).unwrap();
        assert!(marginal_density(&r, 2).unwrap().op().max_abs_diff(&expect) < 1e-15);
    }
}
