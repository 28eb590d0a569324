//! Symbolic models of stationary (and block-stationary) sources.
//!
//! A [`SourceModel`] materializes its `n`-site marginals, knows its entropy
//! rate in closed form where one exists, and supports the blocking and
//! restriction transforms used to reduce mixing references to block-iid
//! ones.

mod ergodic;
pub mod file;
mod marginal;
mod markov;
mod mixing;
mod transform;

pub use ergodic::{ergodic_components, ErgodicComponentList};
pub use marginal::{
    marginal_density, marginal_density_within, marginal_distribution, stationarity_check,
    MAX_CLASSICAL_OUTCOMES,
};
pub use markov::MarkovChain;
pub use mixing::{mixing_coefficient, mixing_report, MixingEntry, MixingReport};
pub use transform::{block_transform, restrict_tail};

use crate::ext::ExtReal;
use crate::operator::{hermitian_eig, DensityOperator, DEFAULT_GROUPING_TOL};
use crate::{Error, Result};

pub(crate) const PROB_TOL: f64 = 1e-10;

/// Entries nonnegative and summing to one within 1e-10.
pub fn check_probability_vector(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Probability("empty vector".into()));
    }
    if let Some(x) = p.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::Probability(format!("entry {x} is not a probability")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > PROB_TOL {
        return Err(Error::Probability(format!("entries sum to {s}")));
    }
    Ok(())
}

/// The one-site algebra: `M_dim` or, when abelian, the diagonal subalgebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct SiteAlgebra {
    pub dim: usize,
    pub abelian: bool,
}

/// A probability vector, validated at construction.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(p: &[f64]) -> Result<Self> {
        check_probability_vector(p)?;
        Ok(Distribution(p.to_vec()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A state on blocks of `block_len` sites, repeated iid block after block.
#[derive(Clone, Debug)]
pub struct BlockState {
    rho: DensityOperator,
    block_len: usize,
    site_dim: usize,
}

impl BlockState {
    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }
}

/// A finite convex combination of non-mixture models on one site algebra.
#[derive(Clone, Debug)]
pub struct Mixture {
    weights: Vec<f64>,
    components: Vec<SourceModel>,
}

impl Mixture {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[SourceModel] {
        &self.components
    }
}

#[derive(Clone, Debug)]
pub enum SourceModel {
    ClassicalIid(Distribution),
    ClassicalMarkov(MarkovChain),
    QuantumIid(DensityOperator),
    QuantumBlockIid(BlockState),
    FiniteMixture(Mixture),
}

impl SourceModel {
    pub fn classical_iid(p: &[f64]) -> Result<Self> {
        Ok(SourceModel::ClassicalIid(Distribution::new(p)?))
    }

    /// Bernoulli source on `{0, 1}` with `P(0) = p0`.
    pub fn bernoulli(p0: f64) -> Result<Self> {
        Self::classical_iid(&[p0, 1.0 - p0])
    }

    pub fn classical_markov(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(SourceModel::ClassicalMarkov(MarkovChain::new(rows)?))
    }

    pub fn classical_markov_with_stationary(pi: &[f64], rows: &[Vec<f64>]) -> Result<Self> {
        Ok(SourceModel::ClassicalMarkov(MarkovChain::with_stationary(pi, rows)?))
    }

    pub fn quantum_iid(rho: DensityOperator) -> Self {
        SourceModel::QuantumIid(rho)
    }

    /// `rho_block` lives on `block_len` sites; its dimension must be a
    /// perfect `block_len`-th power.
    pub fn quantum_block_iid(rho_block: DensityOperator, block_len: usize) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::invalid("block length must be positive"));
        }
        let dim = rho_block.dim();
        let site_dim = (dim as f64).powf(1.0 / block_len as f64).round() as usize;
        if crate::operator::checked_pow(site_dim, block_len) != dim as u128 {
            return Err(Error::invalid(format!(
                "block dimension {dim} is not a {block_len}-th power"
            )));
        }
        Ok(SourceModel::QuantumBlockIid(BlockState {
            rho: rho_block,
            block_len,
            site_dim,
        }))
    }

    pub fn finite_mixture(weights: &[f64], components: Vec<SourceModel>) -> Result<Self> {
        if weights.len() != components.len() || components.is_empty() {
            return Err(Error::invalid("mixture needs one weight per component"));
        }
        check_probability_vector(weights)?;
        let site = components[0].site();
        for c in &components {
            if matches!(c, SourceModel::FiniteMixture(_)) {
                return Err(Error::Unsupported("nested mixtures".into()));
            }
            if c.site() != site {
                return Err(Error::invalid("mixture components must share one site algebra"));
            }
        }
        Ok(SourceModel::FiniteMixture(Mixture {
            weights: weights.to_vec(),
            components,
        }))
    }

    pub fn site(&self) -> SiteAlgebra {
        match self {
            SourceModel::ClassicalIid(p) => SiteAlgebra {
                dim: p.len(),
                abelian: true,
            },
            SourceModel::ClassicalMarkov(c) => SiteAlgebra {
                dim: c.states(),
                abelian: true,
            },
            SourceModel::QuantumIid(rho) => SiteAlgebra {
                dim: rho.dim(),
                abelian: false,
            },
            SourceModel::QuantumBlockIid(b) => SiteAlgebra {
                dim: b.site_dim,
                abelian: false,
            },
            SourceModel::FiniteMixture(m) => m.components[0].site(),
        }
    }

    pub fn is_classical(&self) -> bool {
        self.site().abelian
    }

    pub fn is_mixture(&self) -> bool {
        matches!(self, SourceModel::FiniteMixture(_))
    }

    /// Classical iid source or a mixture of them: every such model assigns
    /// the same probability to all sequences of one type.
    pub fn is_iid_or_iid_mixture(&self) -> bool {
        match self {
            SourceModel::ClassicalIid(_) => true,
            SourceModel::FiniteMixture(m) => m
                .components
                .iter()
                .all(|c| matches!(c, SourceModel::ClassicalIid(_))),
            _ => false,
        }
    }

    /// Classical model viewed as a Markov chain (iid sources have constant rows).
    pub fn as_markov(&self) -> Option<MarkovChain> {
        match self {
            SourceModel::ClassicalIid(p) => Some(MarkovChain::iid(p.as_slice())),
            SourceModel::ClassicalMarkov(c) => Some(c.clone()),
            _ => None,
        }
    }

    /// Short human-readable tag, used in reports.
    pub fn label(&self) -> String {
        match self {
            SourceModel::ClassicalIid(p) => format!("classical_iid{:?}", p.as_slice()),
            SourceModel::ClassicalMarkov(c) => format!("classical_markov{:?}", c.rows()),
            SourceModel::QuantumIid(rho) => format!("quantum_iid(dim {})", rho.dim()),
            SourceModel::QuantumBlockIid(b) => {
                format!("quantum_block_iid(dim {}, block {})", b.rho.dim(), b.block_len)
            }
            SourceModel::FiniteMixture(m) => format!("finite_mixture({} components)", m.components.len()),
        }
    }
}

/// Shannon entropy in nats, `0 ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Entropy rate in nats per site.
///
/// Mixtures have no single rate in this sense: use the per-component
/// evaluation in `divergence::overline_s`.
pub fn entropy_rate(m: &SourceModel) -> Result<ExtReal> {
    let h = match m {
        SourceModel::ClassicalIid(p) => shannon_entropy(p.as_slice()),
        SourceModel::ClassicalMarkov(c) => (0..c.states())
            .map(|i| c.pi()[i] * shannon_entropy(c.row(i)))
            .sum(),
        SourceModel::QuantumIid(rho) => von_neumann(rho)?,
        SourceModel::QuantumBlockIid(b) => von_neumann(&b.rho)? / b.block_len as f64,
        SourceModel::FiniteMixture(_) => {
            return Err(Error::Unsupported(
                "entropy rate of a mixture; evaluate its ergodic components instead".into(),
            ))
        }
    };
    Ok(ExtReal::Finite(h.max(0.0)))
}

fn von_neumann(rho: &DensityOperator) -> Result<f64> {
    let sd = hermitian_eig(rho.op(), DEFAULT_GROUPING_TOL)?;
    Ok((0..sd.len())
        .map(|i| {
            let l = sd.eigenvalues()[i];
            if l > 0.0 {
                -(sd.multiplicity(i) as f64) * l * l.ln()
            } else {
                0.0
            }
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_rates_in_closed_form() {
        let fair = SourceModel::bernoulli(0.5).unwrap();
        assert!((entropy_rate(&fair).unwrap().to_f64() - std::f64::consts::LN_2).abs() < 1e-15);
        let pure = SourceModel::quantum_iid(DensityOperator::pure_real(&[0.6, 0.8]).unwrap());
        assert!(entropy_rate(&pure).unwrap().to_f64().abs() < 1e-12);
        let chain = SourceModel::classical_markov(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        // (2/3)·H(0.1) + (1/3)·H(0.2), nats
        let h = |p: f64| -p * p.ln() - (1.0 - p) * (1.0 - p).ln();
        let expected = 2.0 / 3.0 * h(0.1) + 1.0 / 3.0 * h(0.2);
        let got = entropy_rate(&chain).unwrap().to_f64();
        assert!((got - expected).abs() < 1e-14);
        assert!((got - 0.383523).abs() < 1e-6);
    }

    #[test]
    fn mixture_rate_is_rejected() {
        let m = SourceModel::finite_mixture(
            &[0.5, 0.5],
            vec![SourceModel::bernoulli(1.0).unwrap(), SourceModel::bernoulli(0.5).unwrap()],
        )
        .unwrap();
        assert!(matches!(entropy_rate(&m), Err(Error::Unsupported(_))));
    }

    #[test]
    fn mixture_constraints() {
        let a = SourceModel::bernoulli(0.5).unwrap();
        let q = SourceModel::quantum_iid(DensityOperator::maximally_mixed(2));
        assert!(SourceModel::finite_mixture(&[0.5, 0.5], vec![a.clone(), q]).is_err());
        let m = SourceModel::finite_mixture(&[1.0], vec![a.clone()]).unwrap();
        assert!(SourceModel::finite_mixture(&[1.0], vec![m]).is_err());
        assert!(SourceModel::finite_mixture(&[0.6, 0.6], vec![a.clone(), a]).is_err());
    }

    #[test]
    fn block_state_site_dimension() {
        let rho = DensityOperator::maximally_mixed(8);
        let m = SourceModel::quantum_block_iid(rho.clone(), 3).unwrap();
        assert_eq!(m.site(), SiteAlgebra { dim: 2, abelian: false });
        assert!(SourceModel::quantum_block_iid(rho, 2).is_err());
    }
}
