//! Entropies, relative entropies and their per-site rates, in nats.

use faer::Mat;
use serde::Serialize;

use crate::ext::ExtReal;
use crate::operator::{check_dims, DensityOperator, Eigen, HermitianOperator};
use crate::source::{
    block_transform, entropy_rate, ergodic_components, marginal_density, marginal_distribution,
    shannon_entropy, SourceModel,
};
use crate::{Error, Result};

/// Reference eigenvalues at or below this count as zero.
pub const SUPPORT_TOL: f64 = 1e-14;
/// Null-state mass outside the reference support tolerated as rounding.
pub const SUPPORT_MASS_TOL: f64 = 1e-9;
/// Slope fits with a larger residual are flagged as not converged.
pub const SLOPE_RESIDUAL_FLAG: f64 = 1e-3;

/// `−Σ λ ln λ`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    if rho.op().is_diagonal(0.0) {
        return Ok(shannon_entropy(&rho.op().diag()));
    }
    let eig = Eigen::of(rho.op())?;
    let s = -eig
        .values()
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.ln())
        .sum::<f64>();
    Ok(s.clamp(0.0, (rho.dim() as f64).ln()))
}

/// `−Tr D_ψ ln D_φ` on `supp φ`, `+∞` when `ψ` has mass outside it.
pub fn cross_term(psi: &DensityOperator, phi: &DensityOperator) -> Result<ExtReal> {
    check_dims(psi.dim(), phi.dim())?;
    if psi.op().is_diagonal(0.0) && phi.op().is_diagonal(0.0) {
        return Ok(classical_cross(&psi.op().diag(), &phi.op().diag()));
    }
    let eig = Eigen::of(phi.op())?;
    let weights = eig.quad_forms(psi.op());
    Ok(classical_cross(&weights, eig.values()))
}

fn classical_cross(p: &[f64], q: &[f64]) -> ExtReal {
    let mut outside = 0.0;
    let mut acc = 0.0;
    for (&w, &l) in p.iter().zip(q) {
        if l <= SUPPORT_TOL {
            outside += w.max(0.0);
        } else if w > 0.0 {
            acc -= w * l.ln();
        }
    }
    if outside > SUPPORT_MASS_TOL {
        ExtReal::PosInf
    } else {
        ExtReal::Finite(acc)
    }
}

/// Umegaki relative entropy `Tr D_ψ (ln D_ψ − ln D_φ)`, `+∞` unless
/// `supp ψ ≤ supp φ`.
pub fn relative_entropy(psi: &DensityOperator, phi: &DensityOperator) -> Result<ExtReal> {
    match cross_term(psi, phi)? {
        ExtReal::Finite(c) => Ok(ExtReal::Finite((c - von_neumann_entropy(psi)?).max(0.0))),
        inf => Ok(inf),
    }
}

/// Kullback–Leibler divergence of two probability vectors.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<ExtReal> {
    check_dims(p.len(), q.len())?;
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return Ok(ExtReal::PosInf);
        }
        acc += a * (a / b).ln();
    }
    Ok(ExtReal::Finite(acc.max(0.0)))
}

/// Measured relative entropy of the measurement that first pinches `ψ` by
/// the eigen-projections of `φ` and then reads out an eigenbasis of the
/// pinched state. Lossless when `ψ` and `φ` commute, and never above
/// [`relative_entropy`].
pub fn measured_relative_entropy_lb(psi: &DensityOperator, phi: &DensityOperator) -> Result<ExtReal> {
    check_dims(psi.dim(), phi.dim())?;
    if psi.op().is_diagonal(0.0) && phi.op().is_diagonal(0.0) {
        return measured_kl(&psi.op().diag(), &phi.op().diag());
    }
    let d = psi.dim();
    let eig = Eigen::of(phi.op())?;
    let v = eig.vectors();
    let rotated = v.adjoint() * psi.op().as_mat() * v;
    let mut p = Vec::with_capacity(d);
    let mut q = Vec::with_capacity(d);
    for g in log_groups(eig.values()) {
        let k = g.len();
        let block = HermitianOperator::symmetrized(Mat::from_fn(k, k, |i, j| rotated[(g.start + i, g.start + j)]));
        let be = Eigen::of(&block)?;
        let w = be.vectors();
        for c in 0..k {
            p.push(be.values()[c].max(0.0));
            q.push((0..k).map(|i| eig.values()[g.start + i].max(0.0) * w[(i, c)].norm_sqr()).sum());
        }
    }
    measured_kl(&p, &q)
}

fn measured_kl(p: &[f64], q: &[f64]) -> Result<ExtReal> {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a <= 0.0 {
            continue;
        }
        if b <= SUPPORT_TOL {
            if a > SUPPORT_MASS_TOL {
                return Ok(ExtReal::PosInf);
            }
            continue;
        }
        acc += a * (a / b).ln();
    }
    Ok(ExtReal::Finite(acc.max(0.0)))
}

/// Groups a descending spectrum by relative closeness, zero eigenvalues
/// forming one group.
fn log_groups(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        let split = k == values.len() || {
            let (a, b) = (values[k - 1], values[k]);
            if a <= SUPPORT_TOL {
                false
            } else {
                a - b > 1e-9 * a + 1e-15
            }
        };
        if split {
            out.push(start..k);
            start = k;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    ClosedFormIid,
    ClosedFormMarkov,
    FiniteNSlope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateResult {
    pub value: ExtReal,
    pub method: RateMethod,
    pub n_used: usize,
    pub residual: f64,
}

impl RateResult {
    fn closed(value: ExtReal, method: RateMethod) -> Self {
        RateResult {
            value: value.clamp_nonneg(1e-9),
            method,
            n_used: 0,
            residual: 0.0,
        }
    }

    /// Slope fit did not settle (residual above 1e-3).
    pub fn flagged(&self) -> bool {
        self.residual > SLOPE_RESIDUAL_FLAG
    }
}

/// `lim (1/n) S(P^(n), Q^(n))`, in closed form where possible and
/// otherwise as the least-squares slope over `n ∈ [n_max/2, n_max]`.
pub fn relative_entropy_rate(p: &SourceModel, q: &SourceModel, n_max: usize) -> Result<RateResult> {
    if p.is_mixture() {
        return Err(Error::Unsupported(
            "relative entropy rate of a mixture; use underline_s".into(),
        ));
    }
    if p.site().dim != q.site().dim {
        return Err(Error::DimensionMismatch(p.site().dim, q.site().dim));
    }
    match (p, q) {
        (SourceModel::ClassicalIid(a), SourceModel::ClassicalIid(b)) => {
            return Ok(RateResult::closed(kl_divergence(a.as_slice(), b.as_slice())?, RateMethod::ClosedFormIid))
        }
        (SourceModel::QuantumIid(a), SourceModel::QuantumIid(b)) => {
            return Ok(RateResult::closed(relative_entropy(a, b)?, RateMethod::ClosedFormIid))
        }
        (SourceModel::QuantumBlockIid(a), SourceModel::QuantumBlockIid(b)) if a.block_len() == b.block_len() => {
            let s = relative_entropy(a.rho(), b.rho())?.per(a.block_len() as f64);
            return Ok(RateResult::closed(s, RateMethod::ClosedFormIid));
        }
        _ => {}
    }
    if let (Some(a), Some(b)) = (p.as_markov(), q.as_markov()) {
        let d = a.states();
        let mut acc = 0.0;
        for i in (0..d).filter(|&i| a.pi()[i] > 0.0) {
            if b.pi()[i] <= 0.0 {
                return Ok(RateResult::closed(ExtReal::PosInf, RateMethod::ClosedFormMarkov));
            }
            match kl_divergence(a.row(i), b.row(i))? {
                ExtReal::Finite(k) => acc += a.pi()[i] * k,
                _ => return Ok(RateResult::closed(ExtReal::PosInf, RateMethod::ClosedFormMarkov)),
            }
        }
        return Ok(RateResult::closed(ExtReal::Finite(acc), RateMethod::ClosedFormMarkov));
    }
    finite_n_slope(p, q, n_max)
}

fn finite_n_slope(p: &SourceModel, q: &SourceModel, n_max: usize) -> Result<RateResult> {
    if n_max < 4 {
        return Err(Error::invalid("finite-n slope needs n_max >= 4"));
    }
    let ns: Vec<usize> = (n_max / 2..=n_max).collect();
    let mut ys = Vec::with_capacity(ns.len());
    for &n in &ns {
        let s = if p.is_classical() && q.is_classical() {
            kl_divergence(&marginal_distribution(p, n)?, &marginal_distribution(q, n)?)?
        } else {
            relative_entropy(&marginal_density(p, n)?, &marginal_density(q, n)?)?
        };
        match s {
            ExtReal::Finite(x) => ys.push(x),
            inf => {
                return Ok(RateResult {
                    value: inf,
                    method: RateMethod::FiniteNSlope,
                    n_used: n,
                    residual: 0.0,
                })
            }
        }
    }
    let k = ns.len() as f64;
    let mx = ns.iter().map(|&n| n as f64).sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = ns.iter().map(|&n| (n as f64 - mx).powi(2)).sum();
    let sxy: f64 = ns.iter().zip(&ys).map(|(&n, y)| (n as f64 - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = (ns
        .iter()
        .zip(&ys)
        .map(|(&n, y)| (y - icpt - slope * n as f64).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(RateResult {
        value: ExtReal::Finite(slope).clamp_nonneg(1e-9),
        method: RateMethod::FiniteNSlope,
        n_used: n_max,
        residual,
    })
}

/// Essential infimum over the ergodic components of `P` of their relative
/// entropy rate against `Q`, per site.
pub fn underline_s(p: &SourceModel, q: &SourceModel, block_len: usize, n_max: usize) -> Result<ExtReal> {
    let comps = ergodic_components(p, block_len)?;
    let q_blocked = block_transform(q, comps.block_len)?;
    let mut best = ExtReal::PosInf;
    for (_, c) in comps.essential() {
        let r = relative_entropy_rate(c, &q_blocked, n_max)?.value;
        best = best.min(r.per(comps.block_len as f64));
    }
    Ok(best)
}

/// Essential supremum over the ergodic components of their entropy rate,
/// per site.
pub fn overline_s(p: &SourceModel, block_len: usize) -> Result<ExtReal> {
    let comps = ergodic_components(p, block_len)?;
    let mut best = ExtReal::NegInf;
    for (_, c) in comps.essential() {
        best = best.max(entropy_rate(c)?.per(comps.block_len as f64));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::c64;

    const LN2: f64 = std::f64::consts::LN_2;

    fn plus() -> DensityOperator {
        DensityOperator::pure_real(&[1.0, 1.0]).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&plus()).unwrap().abs() < 1e-12);
        assert!((von_neumann_entropy(&DensityOperator::maximally_mixed(5)).unwrap() - 5f64.ln()).abs() < 1e-14);
        let r = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
        assert!((von_neumann_entropy(&r).unwrap() - 0.562335).abs() < 1e-6);
    }

    #[test]
    fn relative_entropy_examples() {
        let r = DensityOperator::pure(&[c64::new(0.6, 0.0), c64::new(0.0, 0.8)]).unwrap();
        assert_eq!(relative_entropy(&r, &r).unwrap().to_f64(), 0.0);
        let e0 = DensityOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let mm = DensityOperator::maximally_mixed(2);
        assert!((relative_entropy(&e0, &mm).unwrap().to_f64() - LN2).abs() < 1e-14);
        let half = DensityOperator::from_diagonal(&[0.5, 0.5]).unwrap();
        assert_eq!(relative_entropy(&half, &e0).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn cross_term_examples() {
        let r = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
        let s = von_neumann_entropy(&r).unwrap();
        assert!((cross_term(&r, &r).unwrap().to_f64() - s).abs() < 1e-14);
        let e0 = DensityOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!((cross_term(&e0, &r).unwrap().to_f64() + 0.75f64.ln()).abs() < 1e-14);
        assert_eq!(cross_term(&r, &e0).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn measured_bound_examples() {
        let r = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
        let lb = measured_relative_entropy_lb(&plus(), &r).unwrap().to_f64();
        assert!((lb - 0.143841).abs() < 1e-6);
        assert!(measured_relative_entropy_lb(&plus(), &plus()).unwrap().to_f64().abs() < 1e-9);
        let a = DensityOperator::from_diagonal(&[0.6, 0.3, 0.1]).unwrap();
        let b = DensityOperator::from_diagonal(&[0.2, 0.2, 0.6]).unwrap();
        let exact = relative_entropy(&a, &b).unwrap().to_f64();
        assert!((measured_relative_entropy_lb(&a, &b).unwrap().to_f64() - exact).abs() < 1e-10);
    }

    #[test]
    fn measured_bound_is_lossless_on_degenerate_commuting_pairs() {
        // ψ is not diagonal in the computational basis but commutes with I/2
        let mm = DensityOperator::maximally_mixed(2);
        let exact = relative_entropy(&plus(), &mm).unwrap().to_f64();
        let lb = measured_relative_entropy_lb(&plus(), &mm).unwrap().to_f64();
        assert!((lb - exact).abs() < 1e-10 && (exact - LN2).abs() < 1e-12);
    }

    #[test]
    fn rate_examples() {
        let a = SourceModel::bernoulli(0.5).unwrap();
        let b = SourceModel::bernoulli(0.25).unwrap();
        let r = relative_entropy_rate(&a, &a, 8).unwrap();
        assert_eq!(r.value.to_f64(), 0.0);
        let r = relative_entropy_rate(&a, &b, 8).unwrap();
        assert_eq!(r.method, RateMethod::ClosedFormIid);
        assert!((r.value.to_f64() - 0.143841).abs() < 1e-6);
        let r = relative_entropy_rate(&a, &SourceModel::bernoulli(1.0).unwrap(), 8).unwrap();
        assert_eq!(r.value, ExtReal::PosInf);
    }

    #[test]
    fn markov_closed_form_matches_slope() {
        let p = SourceModel::bernoulli(0.5).unwrap();
        let q = SourceModel::classical_markov(&[vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        let closed = relative_entropy_rate(&p, &q, 8).unwrap();
        assert_eq!(closed.method, RateMethod::ClosedFormMarkov);
        let slope = finite_n_slope(&p, &q, 12).unwrap();
        assert!((closed.value.to_f64() - slope.value.to_f64()).abs() < 1e-9);
        assert!(!slope.flagged());
        // 0.5 ln(0.5/0.75) + 0.5 ln(0.5/0.25)
        let h = 0.5 * (0.5f64 / 0.75).ln() + 0.5 * 2f64.ln();
        assert!((closed.value.to_f64() - h).abs() < 1e-14);
    }

    #[test]
    fn slope_matches_iid_closed_form() {
        let a = SourceModel::quantum_iid(plus());
        let b = SourceModel::quantum_iid(DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap());
        let closed = relative_entropy_rate(&a, &b, 8).unwrap();
        let slope = finite_n_slope(&a, &b, 8).unwrap();
        assert!((closed.value.to_f64() - slope.value.to_f64()).abs() < 1e-6);
        assert!(finite_n_slope(&a, &b, 3).is_err());
    }

    #[test]
    fn mixture_rates() {
        let dirac = SourceModel::bernoulli(1.0).unwrap();
        let fair = SourceModel::bernoulli(0.5).unwrap();
        let mix = SourceModel::finite_mixture(&[0.5, 0.5], vec![dirac.clone(), fair.clone()]).unwrap();
        assert!(relative_entropy_rate(&mix, &fair, 8).is_err());
        assert_eq!(underline_s(&mix, &fair, 1, 8).unwrap().to_f64(), 0.0);
        let quarter = SourceModel::bernoulli(0.25).unwrap();
        let ones = SourceModel::bernoulli(0.0).unwrap();
        let mix2 = SourceModel::finite_mixture(&[0.5, 0.5], vec![fair.clone(), ones]).unwrap();
        // both components put mass outside the support of δ_0
        assert_eq!(underline_s(&mix2, &dirac, 1, 8).unwrap(), ExtReal::PosInf);
        // rates {0.143841, ln(4/3)}
        let u = underline_s(&mix2, &quarter, 1, 8).unwrap().to_f64();
        assert!((u - 0.143841).abs() < 1e-6);
        assert!((underline_s(&fair, &quarter, 1, 8).unwrap().to_f64() - 0.143841).abs() < 1e-6);
    }

    #[test]
    fn overline_examples() {
        let pure = SourceModel::quantum_iid(DensityOperator::from_diagonal(&[1.0, 0.0]).unwrap());
        let mixed = SourceModel::quantum_iid(DensityOperator::maximally_mixed(2));
        let m = SourceModel::finite_mixture(&[0.5, 0.5], vec![pure.clone(), mixed.clone()]).unwrap();
        assert!((overline_s(&m, 1).unwrap().to_f64() - LN2).abs() < 1e-12);
        let m = SourceModel::finite_mixture(&[1.0, 0.0], vec![pure.clone(), mixed]).unwrap();
        assert_eq!(overline_s(&m, 1).unwrap().to_f64(), 0.0);
        assert_eq!(overline_s(&pure, 1).unwrap().to_f64(), 0.0);
    }

    #[test]
    fn periodic_chain_rates_per_site() {
        let swap = SourceModel::classical_markov(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(overline_s(&swap, 2).unwrap().to_f64(), 0.0);
        let fair = SourceModel::bernoulli(0.5).unwrap();
        // each phase is a deterministic sequence against the fair coin
        assert!((underline_s(&swap, &fair, 2, 8).unwrap().to_f64() - LN2).abs() < 1e-12);
    }
}
