use serde::Serialize;

use super::atoms::classical_beta_frame;
use super::dense::np_relaxed_beta;
use super::{converse_bound, converse_from_divergence};
use crate::classical::ClassicalFrame;
use crate::divergence::relative_entropy_rate;
use crate::ext::ExtReal;
use crate::operator::DEFAULT_DIM_GUARD;
use crate::source::{marginal_density_within, SourceModel};
use crate::typicality::RATE_N_MAX;
use crate::{Error, Result};

/// Rounding allowance below the target and the converse floor.
pub const UNDERCUT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconclusive,
    Violated,
}

#[derive(Debug, Clone, Copy)]
pub struct HpOptions {
    /// Largest `|β/n − target|` at the last `n` still called consistent.
    pub tolerance: f64,
    pub max_dim: usize,
}

impl Default for HpOptions {
    fn default() -> Self {
        HpOptions {
            tolerance: 0.05,
            max_dim: DEFAULT_DIM_GUARD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpProbeReport {
    pub n_values: Vec<usize>,
    pub beta_over_n: Vec<ExtReal>,
    /// `−s(Ψ, Φ)`.
    pub target: ExtReal,
    /// Converse bound `−(S(Ψ^(n), Φ^(n)) + ln 2)/((1 − ε)·n)` at each `n`.
    pub floor: Vec<ExtReal>,
    /// Some `β/n` lies below the target by more than the rounding allowance.
    pub undercuts_target: bool,
    pub final_gap: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl HpProbeReport {
    pub fn gaps(&self) -> Vec<f64> {
        self.beta_over_n.iter().map(|b| b.distance(self.target)).collect()
    }

    /// Whether some `β/n` lies below its converse floor.
    pub fn below_floor(&self) -> bool {
        below(&self.beta_over_n, &self.floor)
    }
}

fn below(values: &[ExtReal], bounds: &[ExtReal]) -> bool {
    values
        .iter()
        .zip(bounds)
        .any(|(b, f)| b.to_f64() < f.to_f64() - UNDERCUT_TOL)
}

/// Relaxed `β_{ε,n}/n` for each `n`, compared with `−s(P, Q)`.
///
/// A value below the converse floor would contradict optimality and makes
/// the verdict `Violated`. Otherwise the verdict is `Consistent` when the
/// gap at the largest `n` is within the tolerance. Values between the floor
/// and the target (the `ln(1 − ε)/n` term for equal sources, say) are
/// flagged by `undercuts_target` but are not violations.
pub fn hp_probe(p: &SourceModel, q: &SourceModel, eps: f64, n_values: &[usize]) -> Result<HpProbeReport> {
    hp_probe_with(p, q, eps, n_values, HpOptions::default())
}

pub fn hp_probe_with(
    p: &SourceModel,
    q: &SourceModel,
    eps: f64,
    n_values: &[usize],
    opts: HpOptions,
) -> Result<HpProbeReport> {
    if n_values.is_empty() {
        return Err(Error::invalid("hp_probe needs at least one n"));
    }
    let target = -relative_entropy_rate(p, q, RATE_N_MAX)?.value;
    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let (beta_over_n, floor): (Vec<_>, Vec<_>) = ns
        .iter()
        .map(|&n| {
            let (beta, floor) = beta_and_floor(p, q, n, eps, opts.max_dim)?;
            Ok((beta.per(n as f64), floor.per(n as f64)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let mut report = HpProbeReport {
        final_gap: beta_over_n.last().unwrap().distance(target),
        undercuts_target: below(&beta_over_n, &vec![target; ns.len()]),
        n_values: ns,
        beta_over_n,
        target,
        floor,
        tolerance: opts.tolerance,
        verdict: Verdict::Inconclusive,
    };
    report.verdict = if report.below_floor() {
        Verdict::Violated
    } else if report.final_gap <= opts.tolerance {
        Verdict::Consistent
    } else {
        Verdict::Inconclusive
    };
    Ok(report)
}

/// Relaxed `β_{ε,n}` of the `n`-site marginals.
pub fn beta_relaxed(p: &SourceModel, q: &SourceModel, n: usize, eps: f64, max_dim: usize) -> Result<ExtReal> {
    Ok(beta_and_floor(p, q, n, eps, max_dim)?.0)
}

fn beta_and_floor(p: &SourceModel, q: &SourceModel, n: usize, eps: f64, max_dim: usize) -> Result<(ExtReal, ExtReal)> {
    if p.is_classical() && q.is_classical() {
        let frame = ClassicalFrame::new(&[p, q], n)?;
        let beta = classical_beta_frame(&frame, 0, 1, eps)?.relaxed.value;
        return Ok((beta, converse_from_divergence(frame.relative_entropy(0, 1), eps)));
    }
    let psi = marginal_density_within(p, n, max_dim)?;
    let phi = marginal_density_within(q, n, max_dim)?;
    Ok((np_relaxed_beta(&psi, &phi, eps)?.value, converse_bound(&psi, &phi, eps)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::DensityOperator;

    #[test]
    fn equal_sources_are_consistent() {
        let p = SourceModel::quantum_iid(DensityOperator::from_diagonal(&[0.7, 0.3]).unwrap());
        let r = hp_probe(&p, &p, 0.2, &[1, 2, 4, 8]).unwrap();
        assert_eq!(r.target, ExtReal::ZERO);
        for (b, n) in r.beta_over_n.iter().zip(&r.n_values) {
            let b = b.to_f64();
            assert!(b <= 0.0 && b >= 0.8f64.ln() / *n as f64 - 1e-12);
        }
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn bernoulli_pair_converges() {
        let p = SourceModel::bernoulli(0.5).unwrap();
        let q = SourceModel::bernoulli(0.25).unwrap();
        let r = hp_probe(&p, &q, 0.1, &[256, 1024, 4096]).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!(r.final_gap <= 0.02, "{}", r.final_gap);
    }
}
