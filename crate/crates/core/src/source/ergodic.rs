use serde::Serialize;

use super::transform::block_chain;
use super::SourceModel;
use crate::{Error, Result};

/// Finite ergodic decomposition: the parent is `Σ weights[i]·components[i]`,
/// each component ergodic under the `block_len`-fold shift.
#[derive(Clone, Debug)]
pub struct ErgodicComponentList {
    pub weights: Vec<f64>,
    pub components: Vec<SourceModel>,
    pub block_len: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    weights: &'a [f64],
    components: Vec<String>,
    block_len: usize,
}

impl ErgodicComponentList {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Components carrying positive weight, the support of the decomposing
    /// measure.
    pub fn essential(&self) -> impl Iterator<Item = (f64, &SourceModel)> {
        self.weights
            .iter()
            .copied()
            .zip(&self.components)
            .filter(|(w, _)| *w > 0.0)
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(Summary {
            weights: &self.weights,
            components: self.components.iter().map(SourceModel::label).collect(),
            block_len: self.block_len,
        })
        .expect("plain data serializes")
    }
}

/// Splits `m` into ergodic pieces.
///
/// Mixtures return their own components (`block_len` must be 1). An
/// irreducible Markov chain of period `p` with `p | block_len` splits into
/// `p` phase components on the alphabet of `block_len`-blocks, component `r`
/// starting in cyclic class `r`. Aperiodic chains and the iid variants are
/// returned as a single component.
pub fn ergodic_components(m: &SourceModel, block_len: usize) -> Result<ErgodicComponentList> {
    if block_len == 0 {
        return Err(Error::invalid("block length must be positive"));
    }
    let single = || ErgodicComponentList {
        weights: vec![1.0],
        components: vec![m.clone()],
        block_len,
    };
    match m {
        SourceModel::FiniteMixture(mix) => {
            if block_len != 1 {
                return Err(Error::invalid("mixtures decompose under the unit shift only (block_len = 1)"));
            }
            Ok(ErgodicComponentList {
                weights: mix.weights().to_vec(),
                components: mix.components().to_vec(),
                block_len: 1,
            })
        }
        SourceModel::ClassicalMarkov(c) => {
            if !c.is_irreducible() {
                return Err(Error::Unsupported(
                    "ergodic decomposition of a reducible chain".into(),
                ));
            }
            let (period, class) = c.period()?;
            if period == 1 {
                return Ok(single());
            }
            if block_len % period != 0 {
                return Err(Error::invalid(format!(
                    "chain has period {period}, which does not divide block length {block_len}"
                )));
            }
            let components = (0..period)
                .map(|r| {
                    let set: Vec<usize> = (0..c.states()).filter(|&i| class[i] == r).collect();
                    block_chain(c, block_len, Some(&set)).map(SourceModel::ClassicalMarkov)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ErgodicComponentList {
                weights: vec![1.0 / period as f64; period],
                components,
                block_len,
            })
        }
        _ => Ok(single()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{block_transform, marginal_distribution};

    #[test]
    fn mixture_returns_its_components() {
        let a = SourceModel::bernoulli(1.0).unwrap();
        let b = SourceModel::bernoulli(0.5).unwrap();
        let m = SourceModel::finite_mixture(&[0.5, 0.5], vec![a, b]).unwrap();
        let e = ergodic_components(&m, 1).unwrap();
        assert_eq!(e.weights, vec![0.5, 0.5]);
        assert_eq!(e.len(), 2);
        assert!(ergodic_components(&m, 2).is_err());
    }

    #[test]
    fn aperiodic_chain_is_its_own_component() {
        let m = SourceModel::classical_markov(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let e = ergodic_components(&m, 1).unwrap();
        assert_eq!(e.weights, vec![1.0]);
    }

    #[test]
    fn swap_chain_splits_into_two_phases() {
        let m = SourceModel::classical_markov(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = ergodic_components(&m, 2).unwrap();
        assert_eq!(e.weights, vec![0.5, 0.5]);
        // component 0 always emits the block 01, component 1 always 10
        let c0 = marginal_distribution(&e.components[0], 1).unwrap();
        let c1 = marginal_distribution(&e.components[1], 1).unwrap();
        assert_eq!(c0, vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(c1, vec![0.0, 0.0, 1.0, 0.0]);
        let parent = marginal_distribution(&block_transform(&m, 2).unwrap(), 3).unwrap();
        let a = marginal_distribution(&e.components[0], 3).unwrap();
        let b = marginal_distribution(&e.components[1], 3).unwrap();
        for k in 0..parent.len() {
            assert!((parent[k] - 0.5 * a[k] - 0.5 * b[k]).abs() < 1e-12);
        }
        assert!(ergodic_components(&m, 3).is_err());
    }

    #[test]
    fn reducible_chain_is_rejected() {
        let m = SourceModel::classical_markov(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(ergodic_components(&m, 1), Err(Error::Unsupported(_))));
    }
}
