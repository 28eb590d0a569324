//! Spectral typical projections, maximally separating projections and the
//! slice construction separating a finite family of null states from one
//! reference state.
//!
//! Eigenvalues `λ` of an `n`-site marginal are addressed through their
//! per-site rate `−(1/n) ln λ`, with `λ = 0` at rate `+∞`. Classical
//! families run on a [`ClassicalFrame`]; everything else on dense
//! marginals.

mod backend;
mod slice;

use std::sync::Arc;

use serde::Serialize;

pub use backend::TestProjector;
pub(crate) use backend::Backend;
pub use slice::{
    slice_sanov_projector, slice_sanov_projector_within, SeparatingProjection, SliceInfo, SliceSpec,
};

use crate::classical::AtomKind;
use crate::divergence::{relative_entropy_rate, SUPPORT_TOL};
use crate::ext::ExtReal;
use crate::operator::{DensityOperator, Eigen, Projector, DEFAULT_DIM_GUARD};
use crate::source::{entropy_rate, SourceModel};
use crate::{Error, Result};

/// Slice width used when every null state has the same entropy rate.
pub const DEFAULT_ETA: f64 = 0.035;

/// Largest block length used by slope estimates of rates without a closed
/// form.
pub const RATE_N_MAX: usize = 8;

/// Right-closed interval `(lo, hi]` of per-site rates; `hi = +∞` includes
/// the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub lo: ExtReal,
    pub hi: ExtReal,
}

impl Band {
    pub fn contains(&self, rate: ExtReal) -> bool {
        self.lo < rate && rate <= self.hi
    }
}

/// Eigenvalues `λ` of an `n`-site operator with `−(1/n) ln λ` in
/// `(center − half_width, center + half_width]`. With `center = +∞` the
/// window is `spec_0` together with all rates above `1/half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralWindow {
    pub center: ExtReal,
    pub half_width: f64,
    pub n: usize,
}

impl SpectralWindow {
    pub fn new(center: ExtReal, half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::invalid("window half-width must be positive"));
        }
        if n == 0 {
            return Err(Error::invalid("window needs n >= 1"));
        }
        if center == ExtReal::NegInf {
            return Err(Error::invalid("window center cannot be -inf"));
        }
        Ok(SpectralWindow {
            center,
            half_width,
            n,
        })
    }

    pub fn band(&self) -> Band {
        match self.center {
            ExtReal::Finite(c) => Band {
                lo: ExtReal::Finite(c - self.half_width),
                hi: ExtReal::Finite(c + self.half_width),
            },
            _ => Band {
                lo: ExtReal::Finite(1.0 / self.half_width),
                hi: ExtReal::PosInf,
            },
        }
    }

    pub fn contains_eigenvalue(&self, lambda: f64) -> bool {
        self.band().contains(eigen_rate(lambda, self.n))
    }
}

/// `−(1/n) ln λ`, with eigenvalues at or below the support tolerance read
/// as zero.
pub fn eigen_rate(lambda: f64, n: usize) -> ExtReal {
    if lambda <= SUPPORT_TOL {
        ExtReal::PosInf
    } else {
        ExtReal::Finite(-lambda.ln() / n as f64)
    }
}

/// Sum of the eigen-projections of `phi_n` selected by the window.
pub fn spectral_typical_projector(phi_n: &DensityOperator, window: &SpectralWindow) -> Result<Projector> {
    let eig = Eigen::of(phi_n.op())?;
    Ok(eig.projector_where(|l| window.contains_eigenvalue(l)))
}

/// A projector together with its mass under the model it was built for.
#[derive(Debug, Clone)]
pub struct Typical {
    pub projector: TestProjector,
    pub mass: f64,
    pub log_rank: ExtReal,
}

fn ergodic_rate(m: &SourceModel) -> Result<f64> {
    if m.is_mixture() {
        return Err(Error::Unsupported(
            "typical projections of a mixture; use its ergodic components".into(),
        ));
    }
    Ok(entropy_rate(m)?.to_f64())
}

/// `u_{Ψ^(n)}^δ(s(Ψ))`: the spectral window of the model's own marginal
/// around its entropy rate.
pub fn entropy_typical_projector(m: &SourceModel, n: usize, delta: f64) -> Result<Typical> {
    entropy_typical_projector_within(m, n, delta, DEFAULT_DIM_GUARD)
}

pub fn entropy_typical_projector_within(m: &SourceModel, n: usize, delta: f64, max_dim: usize) -> Result<Typical> {
    let s = ergodic_rate(m)?;
    let window = SpectralWindow::new(ExtReal::Finite(s), delta, n)?;
    let be = Backend::within(&[m], n, max_dim)?;
    let projector = be.window(0, window.band());
    Ok(Typical {
        mass: be.mass(0, &projector)?,
        log_rank: be.log_rank(&projector),
        projector,
    })
}

/// `s(P) + s(P, Q)`, the rate at which `Q`'s eigenvalues concentrate under `P`.
pub fn relative_center(p: &SourceModel, q: &SourceModel) -> Result<ExtReal> {
    let s = ergodic_rate(p)?;
    let rel = relative_entropy_rate(p, q, RATE_N_MAX)?.value;
    Ok(rel.checked_add(ExtReal::Finite(s)).expect("rates are nonnegative"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AepMass {
    pub mass: f64,
    pub center: ExtReal,
}

/// `Ψ^(n)(u_{Φ^(n)}^ε(s(Ψ) + s(Ψ,Φ)))`.
pub fn relative_aep_mass(p: &SourceModel, q: &SourceModel, n: usize, eps: f64) -> Result<AepMass> {
    relative_aep_mass_within(p, q, n, eps, DEFAULT_DIM_GUARD)
}

pub fn relative_aep_mass_within(
    p: &SourceModel,
    q: &SourceModel,
    n: usize,
    eps: f64,
    max_dim: usize,
) -> Result<AepMass> {
    let center = relative_center(p, q)?;
    let window = SpectralWindow::new(center, eps, n)?;
    let be = Backend::within(&[p, q], n, max_dim)?;
    let u = be.window(1, window.band());
    Ok(AepMass {
        mass: be.mass(0, &u)?,
        center,
    })
}

#[derive(Debug, Clone)]
pub struct Separation {
    pub projector: TestProjector,
    /// `Ψ^(n)` mass of the projector.
    pub p_mass: f64,
    /// `(1/n) ln Φ^(n)` mass of the projector.
    pub q_log_mass: ExtReal,
    pub log_rank: ExtReal,
}

/// `supp(u_n p_n u_n)` with `p_n` the entropy-typical projector of `P` and
/// `u_n` the spectral window of `Q` around `s(P) + s(P,Q)`.
pub fn maximally_separating_projector(
    p: &SourceModel,
    q: &SourceModel,
    n: usize,
    eps: f64,
    delta: f64,
) -> Result<Separation> {
    maximally_separating_projector_within(p, q, n, eps, delta, DEFAULT_DIM_GUARD)
}

pub fn maximally_separating_projector_within(
    p: &SourceModel,
    q: &SourceModel,
    n: usize,
    eps: f64,
    delta: f64,
    max_dim: usize,
) -> Result<Separation> {
    let s = ergodic_rate(p)?;
    let typical = SpectralWindow::new(ExtReal::Finite(s), delta, n)?;
    let window = SpectralWindow::new(relative_center(p, q)?, eps, n)?;
    let be = Backend::within(&[p, q], n, max_dim)?;
    let p_n = be.window(0, typical.band());
    let u_n = be.window(1, window.band());
    let projector = be.separate(&u_n, &p_n)?;
    Ok(Separation {
        p_mass: be.mass(0, &projector)?,
        q_log_mass: be.log_mass(1, &projector)?.per(n as f64),
        log_rank: be.log_rank(&projector),
        projector,
    })
}

#[derive(Debug, Clone)]
pub struct Universal {
    pub projector: TestProjector,
    pub log_rank: ExtReal,
    /// Mass under each member, in input order.
    pub masses: Vec<f64>,
}

/// Join over the members of their typical projectors, each cut off at
/// `level`: member `ψ` contributes the rates in `(s(ψ) − δ, min(s(ψ) + δ, level)]`.
/// Stands in for a universal typical subspace over the finite family.
pub fn universal_typical_projector(
    omega: &[SourceModel],
    n: usize,
    level: f64,
    delta: f64,
) -> Result<Universal> {
    universal_typical_projector_within(omega, n, level, delta, DEFAULT_DIM_GUARD)
}

pub fn universal_typical_projector_within(
    omega: &[SourceModel],
    n: usize,
    level: f64,
    delta: f64,
    max_dim: usize,
) -> Result<Universal> {
    if omega.is_empty() {
        return Err(Error::invalid("empty family"));
    }
    if !(delta > 0.0) {
        return Err(Error::invalid("delta must be positive"));
    }
    let rates = omega.iter().map(ergodic_rate).collect::<Result<Vec<_>>>()?;
    if let Some(s) = rates.iter().find(|&&s| s >= level) {
        return Err(Error::invalid(format!(
            "member entropy rate {s} is not below the level {level}"
        )));
    }
    let refs: Vec<&SourceModel> = omega.iter().collect();
    let be = Backend::within(&refs, n, max_dim)?;
    let projector = be.universal(&(0..omega.len()).collect::<Vec<_>>(), &rates, level, delta)?;
    let masses = (0..omega.len())
        .map(|k| be.mass(k, &projector))
        .collect::<Result<Vec<_>>>()?;
    Ok(Universal {
        log_rank: be.log_rank(&projector),
        masses,
        projector,
    })
}

pub(crate) fn atoms_json(atoms: &Arc<AtomKind>, weights: &[f64]) -> serde_json::Value {
    serde_json::Value::Array(
        weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(a, w)| serde_json::json!({"atom": atoms.key(a), "weight": w}))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::tensor_power;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn flat_spectrum_windows() {
        let mm = tensor_power(&DensityOperator::maximally_mixed(2), 3).unwrap();
        let all = SpectralWindow::new(ExtReal::Finite(LN2), 1e-3, 3).unwrap();
        assert_eq!(spectral_typical_projector(&mm, &all).unwrap().rank(), 8);
        let none = SpectralWindow::new(ExtReal::ZERO, 0.5, 3).unwrap();
        assert_eq!(spectral_typical_projector(&mm, &none).unwrap().rank(), 0);
    }

    #[test]
    fn window_picks_middle_eigenvalues() {
        let r = tensor_power(&DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap(), 2).unwrap();
        let w = SpectralWindow::new(ExtReal::Finite(0.84), 0.1, 2).unwrap();
        let p = spectral_typical_projector(&r, &w).unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(p.op().diag(), vec![0.0, 1.0, 1.0, 0.0]);
        assert!(p.op().commutator_norm(r.op()) < 1e-12);
    }

    #[test]
    fn entropy_typical_examples() {
        let mm = SourceModel::quantum_iid(DensityOperator::maximally_mixed(2));
        let t = entropy_typical_projector(&mm, 4, 0.05).unwrap();
        assert!((t.mass - 1.0).abs() < 1e-12);
        assert!((t.log_rank.to_f64() - 4.0 * LN2).abs() < 1e-12);

        let pure = SourceModel::quantum_iid(DensityOperator::pure_real(&[0.6, 0.8]).unwrap());
        let t = entropy_typical_projector(&pure, 3, 0.1).unwrap();
        assert_eq!(t.log_rank.to_f64(), 0.0);
        assert!((t.mass - 1.0).abs() < 1e-12);

        let b = SourceModel::bernoulli(0.75).unwrap();
        let t = entropy_typical_projector(&b, 512, 0.1).unwrap();
        let h = 0.562335;
        assert!(t.mass >= 0.95);
        let r = t.log_rank.to_f64() / 512.0;
        assert!(r >= h - 0.1 && r <= h + 0.1);
    }

    #[test]
    fn relative_aep_examples() {
        let mm = SourceModel::quantum_iid(DensityOperator::maximally_mixed(2));
        for n in 1..5 {
            assert!((relative_aep_mass(&mm, &mm, n, 0.1).unwrap().mass - 1.0).abs() < 1e-12);
        }
        let p = SourceModel::bernoulli(0.5).unwrap();
        let q = SourceModel::bernoulli(0.25).unwrap();
        let a = relative_aep_mass(&p, &q, 512, 0.2).unwrap();
        assert!(a.mass >= 0.95);
        assert!((a.center.to_f64() - (LN2 + 0.143841)).abs() < 1e-6);

        let dirac = SourceModel::bernoulli(1.0).unwrap();
        let a = relative_aep_mass(&p, &dirac, 10, 0.5).unwrap();
        assert_eq!(a.center, ExtReal::PosInf);
        assert!((a.mass - (1.0 - 2f64.powi(-10))).abs() < 1e-14);
    }

    #[test]
    fn maximally_separating_examples() {
        let mm = SourceModel::quantum_iid(DensityOperator::maximally_mixed(2));
        let s = maximally_separating_projector(&mm, &mm, 3, 0.1, 0.1).unwrap();
        assert_eq!(s.q_log_mass.to_f64(), 0.0);
        assert!((s.p_mass - 1.0).abs() < 1e-12);

        let p = SourceModel::bernoulli(0.5).unwrap();
        let q = SourceModel::bernoulli(0.25).unwrap();
        let s = maximally_separating_projector(&p, &q, 512, 0.1, 0.1).unwrap();
        assert!(s.p_mass >= 0.9);
        assert!((s.q_log_mass.to_f64() + 0.143841).abs() <= 0.12);

        let pure = SourceModel::quantum_iid(DensityOperator::pure_real(&[0.6, 0.8]).unwrap());
        let s = maximally_separating_projector(&pure, &mm, 8, 0.1, 0.1).unwrap();
        assert!(s.q_log_mass.to_f64() <= -LN2 + 0.2);
        assert!(s.p_mass >= 0.99);
    }

    #[test]
    fn universal_examples() {
        let b = SourceModel::bernoulli(0.3).unwrap();
        let single = universal_typical_projector(std::slice::from_ref(&b), 64, 0.9, 0.1).unwrap();
        let own = entropy_typical_projector(&b, 64, 0.1).unwrap();
        assert_eq!(single.projector, own.projector);

        let omega = [b, SourceModel::bernoulli(0.7).unwrap()];
        let u = universal_typical_projector(&omega, 512, 0.7, 0.1).unwrap();
        assert!(u.masses.iter().all(|&m| m >= 0.95));
        assert!(u.log_rank.to_f64() / 512.0 <= 0.7);

        let fair = [SourceModel::bernoulli(0.5).unwrap()];
        assert!(universal_typical_projector(&fair, 8, LN2, 0.1).is_err());
    }
}
