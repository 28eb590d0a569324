//! Numerical check of the two-projection estimate
//!
//! ```text
//! τ(qpqu) ≥ τ(p) − 2·τ(1−q)^{1/2} − τ(1−u)          (u commutes with D_τ)
//! Tr(pq)  ≥ (τ(p) − 2·τ(1−q)^{1/2} − τ(1−u)) / c    (D_τ u ≤ c u)
//! ```
//!
//! which is what transfers typicality from a spectral projection `u` of the
//! reference state and a typical projection `p` to `supp(u p u)`.

use serde::Serialize;

use super::algebra::expectation;
use super::hermitian::{check_dims, DensityOperator, Projector};
use super::spectral::Eigen;
use crate::Result;

const COMMUTE_TOL: f64 = 1e-8;
/// Eigenvalues of `u D_τ u` and values of the first right-hand side at or
/// below this are rounding noise; dividing by them would amplify it.
const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MainEstReport {
    /// `τ(qpqu)`
    pub lhs1: f64,
    /// `τ(p) − 2τ(1−q)^{1/2} − τ(1−u)`
    pub rhs1: f64,
    /// `Tr(pq)`
    pub lhs2: f64,
    /// `rhs1 / c`
    pub rhs2: f64,
    /// The constant used for the trace bound.
    pub c: f64,
    /// Whether `[u, D_τ] = 0` within 1e-8. When false the inequalities are
    /// not guaranteed and callers must not assert them.
    pub commutes: bool,
    /// Whether `D_τ u ≤ c u` held within 1e-8 for a supplied `c`.
    pub c_valid: bool,
}

impl MainEstReport {
    pub fn slack1(&self) -> f64 {
        self.lhs1 - self.rhs1
    }

    pub fn slack2(&self) -> f64 {
        self.lhs2 - self.rhs2
    }

    /// Both inequalities hold with slack ≥ −`tol` (vacuously true when the
    /// hypotheses fail).
    pub fn holds(&self, tol: f64) -> bool {
        !(self.commutes && self.c_valid) || (self.slack1() >= -tol && self.slack2() >= -tol)
    }
}

/// Evaluates both sides of the estimate. When `c` is `None` the smallest
/// admissible constant, the largest eigenvalue of `u D_τ u`, is used.
pub fn lemma_mainest_check(
    tau: &DensityOperator,
    p: &Projector,
    q: &Projector,
    u: &Projector,
    c: Option<f64>,
) -> Result<MainEstReport> {
    let d = tau.dim();
    for x in [p.dim(), q.dim(), u.dim()] {
        check_dims(d, x)?;
    }
    let dm = tau.op();
    let commutes = dm.commutator_norm(u.op()) <= COMMUTE_TOL;

    // τ(qpqu) = Tr(D qpq u); real when u commutes with D.
    let qpq = p.op().sandwich(q.op())?;
    let qpqu = qpq.product(u.op());
    let dq = dm.as_mat() * qpqu.as_ref();
    let lhs1 = (0..d).map(|i| dq[(i, i)].re).sum::<f64>();

    let tau_p = expectation(tau, p.op())?;
    let tau_not_q = expectation(tau, q.complement().op())?.max(0.0);
    let tau_not_u = expectation(tau, u.complement().op())?.max(0.0);
    let rhs1 = tau_p - 2.0 * tau_not_q.sqrt() - tau_not_u;

    let lhs2 = qpq.trace();

    let udu = dm.sandwich(u.op())?;
    let c_min = Eigen::of(&udu)?.values()[0];
    let c_min = if c_min <= ZERO_TOL { 0.0 } else { c_min };
    let (c, c_valid) = match c {
        Some(c) => {
            // c·u − D u ≥ 0, with D u = u D u for commuting u
            let gap = u.op().lin_comb(c, &udu, -1.0)?;
            let min = Eigen::of(&gap)?.values().last().copied().unwrap_or(0.0);
            (c, c > 0.0 && min >= -COMMUTE_TOL)
        }
        None => (c_min, true),
    };
    let rhs2 = if c > 0.0 {
        rhs1 / c
    } else if rhs1 <= ZERO_TOL {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };

    Ok(MainEstReport {
        lhs1,
        rhs1,
        lhs2,
        rhs2,
        c,
        commutes,
        c_valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_make_all_slack_vanish() {
        let tau = DensityOperator::from_diagonal(&[0.6, 0.3, 0.1]).unwrap();
        let one = Projector::identity(3);
        let r = lemma_mainest_check(&tau, &one, &one, &one, None).unwrap();
        assert!((r.lhs1 - 1.0).abs() < 1e-12 && (r.rhs1 - 1.0).abs() < 1e-12);
        assert!(r.commutes);
    }

    #[test]
    fn trivial_q_and_u_collapse_to_tau_p() {
        let tau = DensityOperator::from_diagonal(&[0.6, 0.3, 0.1]).unwrap();
        let one = Projector::identity(3);
        let p = Projector::onto(&[
            faer::c64::new(1.0, 0.0),
            faer::c64::new(0.5, 0.2),
            faer::c64::new(0.0, -1.0),
        ])
        .unwrap();
        let r = lemma_mainest_check(&tau, &p, &one, &one, None).unwrap();
        let tau_p = expectation(&tau, p.op()).unwrap();
        assert!((r.rhs1 - tau_p).abs() < 1e-12);
        assert!((r.lhs1 - tau_p).abs() < 1e-12);
    }

    #[test]
    fn non_commuting_u_is_flagged() {
        let tau = DensityOperator::from_diagonal(&[0.7, 0.3]).unwrap();
        let u = Projector::onto(&[faer::c64::new(1.0, 0.0), faer::c64::new(1.0, 0.0)]).unwrap();
        let one = Projector::identity(2);
        let r = lemma_mainest_check(&tau, &one, &one, &u, None).unwrap();
        assert!(!r.commutes);
        assert!(r.holds(1e-9));
    }

    #[test]
    fn supplied_constant_is_validated() {
        let tau = DensityOperator::from_diagonal(&[0.7, 0.3]).unwrap();
        let u = Projector::coordinate(2, &[1]);
        let one = Projector::identity(2);
        assert!(lemma_mainest_check(&tau, &one, &one, &u, Some(0.3)).unwrap().c_valid);
        assert!(!lemma_mainest_check(&tau, &one, &one, &u, Some(0.2)).unwrap().c_valid);
    }
}
