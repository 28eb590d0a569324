//! Optimal tests between two states: the operator-relaxed Neyman–Pearson
//! optimum, a deterministic projection rounding, classical oracles and a
//! finite-`n` probe of the Stein exponent.
//!
//! Values are `ln Φ(T)` for the test `T`; `−∞` when the test has no
//! reference mass at all.

mod atoms;
mod dense;
mod probe;

use serde::Serialize;

pub use atoms::{classical_beta_bruteforce, classical_beta_frame, classical_beta_iid_types, ClassicalBeta};
pub use dense::{np_projection_beta, np_relaxed_beta};
pub use probe::{beta_relaxed, hp_probe, hp_probe_with, HpOptions, HpProbeReport, Verdict, UNDERCUT_TOL};

use crate::divergence::relative_entropy;
use crate::ext::ExtReal;
use crate::operator::DensityOperator;
use crate::{Error, Result};

/// Slack on the constraint `Ψ(T) ≥ 1 − ε`.
pub const CONSTRAINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// Randomized threshold test `0 ≤ T ≤ 1`.
    Relaxed,
    /// A projection.
    Projection,
    /// An outcome subset, found by enumeration.
    Subset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestOutcome {
    /// `ln Φ(T)`.
    pub value: ExtReal,
    /// `1 − Ψ(T)`.
    pub type1_error: f64,
    /// `ln t` for the threshold test built from `D_ψ − t·D_φ`.
    pub log_threshold: ExtReal,
    /// Weight on the boundary eigenspace.
    pub gamma: f64,
    pub kind: TestKind,
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")))
    }
}

/// `−(S(ψ‖φ) + ln 2)/(1 − ε)`: no test with type-I error at most `ε` has
/// smaller `ln Φ`-mass.
pub fn converse_bound(psi: &DensityOperator, phi: &DensityOperator, eps: f64) -> Result<ExtReal> {
    Ok(converse_from_divergence(relative_entropy(psi, phi)?, eps))
}

/// [`converse_bound`] from a known relative entropy.
pub fn converse_from_divergence(s: ExtReal, eps: f64) -> ExtReal {
    assert!((0.0..1.0).contains(&eps));
    match s {
        ExtReal::Finite(s) => ExtReal::Finite(-(s + std::f64::consts::LN_2) / (1.0 - eps)),
        _ => ExtReal::NegInf,
    }
}
