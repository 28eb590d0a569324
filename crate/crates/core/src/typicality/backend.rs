use std::sync::Arc;

use super::{eigen_rate, Band};
use crate::classical::{AtomKind, ClassicalFrame, Selection};
use crate::ext::ExtReal;
use crate::operator::{
    join_projectors, projector_mass, support_projector, DensityOperator, Eigen, HermitianOperator, Projector,
};
use crate::source::{marginal_density_within, SourceModel};
use crate::{Error, Result};

/// Support tolerance for `u p u`.
const SEPARATE_TOL: f64 = 1e-9;

/// A projector on the `n`-site space: dense, or a selection of classical
/// atoms.
#[derive(Clone, Debug)]
pub enum TestProjector {
    Dense(Projector),
    Classical {
        selection: Selection,
        atoms: Arc<AtomKind>,
    },
}

impl TestProjector {
    pub fn as_dense(&self) -> Option<&Projector> {
        match self {
            TestProjector::Dense(p) => Some(p),
            TestProjector::Classical { .. } => None,
        }
    }

    pub fn as_selection(&self) -> Option<&Selection> {
        match self {
            TestProjector::Classical { selection, .. } => Some(selection),
            TestProjector::Dense(_) => None,
        }
    }

    fn selection(&self) -> Result<&Selection> {
        self.as_selection()
            .ok_or_else(|| Error::invalid("dense projector used with a classical frame"))
    }

    fn dense(&self) -> Result<&Projector> {
        self.as_dense()
            .ok_or_else(|| Error::invalid("classical selection used with dense marginals"))
    }

    /// Whether nothing is selected.
    pub fn is_zero(&self) -> bool {
        match self {
            TestProjector::Dense(p) => p.rank() == 0,
            TestProjector::Classical { selection, .. } => selection.is_empty(),
        }
    }
}

impl PartialEq for TestProjector {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (TestProjector::Dense(a), TestProjector::Dense(b)) => {
                a.rank() == b.rank() && a.dim() == b.dim() && a.op().max_abs_diff(b.op()) <= 1e-9
            }
            (
                TestProjector::Classical { selection: a, atoms: ka },
                TestProjector::Classical { selection: b, atoms: kb },
            ) => a == b && ka == kb,
            _ => false,
        }
    }
}

/// `n`-site marginals of a model family, held either as a classical frame
/// or as dense operators with their eigendecompositions.
pub(crate) enum Backend {
    Classical(ClassicalFrame),
    Dense {
        n: usize,
        states: Vec<DensityOperator>,
        eigs: Vec<Eigen>,
    },
}

impl Backend {
    pub fn within(models: &[&SourceModel], n: usize, max_dim: usize) -> Result<Self> {
        if models.iter().all(|m| m.is_classical()) {
            return ClassicalFrame::new(models, n).map(Backend::Classical);
        }
        let states = models
            .iter()
            .map(|m| marginal_density_within(m, n, max_dim))
            .collect::<Result<Vec<_>>>()?;
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::invalid("models act on different site algebras"));
        }
        let eigs = states.iter().map(|s| Eigen::of(s.op())).collect::<Result<Vec<_>>>()?;
        Ok(Backend::Dense { n, states, eigs })
    }

    fn wrap(&self, selection: Selection) -> TestProjector {
        let Backend::Classical(f) = self else { unreachable!() };
        TestProjector::Classical {
            selection,
            atoms: f.kind().clone(),
        }
    }

    /// Eigen-projections of model `k` whose rate lies in the band.
    pub fn window(&self, k: usize, band: Band) -> TestProjector {
        match self {
            Backend::Classical(f) => {
                let rates = f.rates(k);
                self.wrap(f.select(|a| band.contains(rates[a])))
            }
            Backend::Dense { n, eigs, .. } => {
                TestProjector::Dense(eigs[k].projector_where(|l| band.contains(eigen_rate(l, *n))))
            }
        }
    }

    pub fn log_mass(&self, k: usize, p: &TestProjector) -> Result<ExtReal> {
        match self {
            Backend::Classical(f) => Ok(f.log_mass(k, p.selection()?)),
            Backend::Dense { states, .. } => Ok(ExtReal::ln(projector_mass(&states[k], p.dense()?)?)),
        }
    }

    pub fn mass(&self, k: usize, p: &TestProjector) -> Result<f64> {
        match self {
            Backend::Classical(f) => Ok(f.mass(k, p.selection()?)),
            Backend::Dense { states, .. } => projector_mass(&states[k], p.dense()?),
        }
    }

    pub fn log_rank(&self, p: &TestProjector) -> ExtReal {
        match (self, p) {
            (Backend::Classical(f), TestProjector::Classical { selection, .. }) => f.log_rank(selection),
            (_, TestProjector::Dense(p)) => ExtReal::ln(p.rank() as f64),
            _ => panic!("projector does not belong to this backend"),
        }
    }

    pub fn zero(&self) -> TestProjector {
        match self {
            Backend::Classical(f) => self.wrap(f.none()),
            Backend::Dense { states, .. } => TestProjector::Dense(Projector::zero(states[0].dim())),
        }
    }

    pub fn join(&self, ps: &[TestProjector]) -> Result<TestProjector> {
        if ps.is_empty() {
            return Ok(self.zero());
        }
        match self {
            Backend::Classical(_) => {
                let mut acc = ps[0].selection()?.clone();
                for p in &ps[1..] {
                    acc = acc.join(p.selection()?);
                }
                Ok(self.wrap(acc))
            }
            Backend::Dense { .. } => {
                let dense = ps.iter().map(|p| p.dense().cloned()).collect::<Result<Vec<_>>>()?;
                Ok(TestProjector::Dense(join_projectors(&dense)?))
            }
        }
    }

    /// `supp(u p u)`.
    pub fn separate(&self, u: &TestProjector, p: &TestProjector) -> Result<TestProjector> {
        match self {
            Backend::Classical(_) => Ok(self.wrap(u.selection()?.meet(p.selection()?))),
            Backend::Dense { .. } => {
                let upu = p.dense()?.op().sandwich(u.dense()?.op())?;
                Ok(TestProjector::Dense(support_projector(&upu, SEPARATE_TOL)?))
            }
        }
    }

    /// Sum of mutually orthogonal projectors.
    pub fn sum(&self, ps: &[TestProjector]) -> Result<TestProjector> {
        if ps.is_empty() {
            return Ok(self.zero());
        }
        match self {
            Backend::Classical(_) => {
                let sels = ps.iter().map(|p| p.selection().cloned()).collect::<Result<Vec<_>>>()?;
                Ok(self.wrap(Selection::disjoint_sum(&sels)))
            }
            Backend::Dense { states, .. } => {
                let mut acc = HermitianOperator::zero(states[0].dim());
                let mut rank = 0;
                for p in ps {
                    let p = p.dense()?;
                    acc = acc.lin_comb(1.0, p.op(), 1.0)?;
                    rank += p.rank();
                }
                Ok(TestProjector::Dense(Projector::from_parts(acc, rank)))
            }
        }
    }

    /// Join over `members` of their windows `(s − δ, min(s + δ, level)]`.
    pub fn universal(&self, members: &[usize], rates: &[f64], level: f64, delta: f64) -> Result<TestProjector> {
        let parts: Vec<TestProjector> = members
            .iter()
            .map(|&k| {
                let s = rates[k];
                let lo = if delta.is_finite() { ExtReal::Finite(s - delta) } else { ExtReal::NegInf };
                let hi = ExtReal::Finite((s + delta).min(level));
                self.window(k, Band { lo, hi })
            })
            .collect();
        self.join(&parts)
    }
}
