use serde::Serialize;

use super::SourceModel;
use crate::{Error, Result};

/// `α̂(l)` for one gap `l`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixingEntry {
    pub l: usize,
    pub alpha: f64,
    /// Longest past/future cylinder the value is claimed for. For a
    /// stationary Markov chain the bound is exact over cylinders of every
    /// length, so this is documentation only.
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingReport {
    pub l_values: Vec<usize>,
    pub alpha: Vec<f64>,
    pub certified_class: String,
}

impl MixingReport {
    /// No audited gap gives a positive constant: the reference cannot be
    /// `*`-mixing.
    pub fn not_star_mixing(&self) -> bool {
        self.alpha.iter().all(|&a| a == 0.0)
    }
}

/// Best constant `α` in `α Q(B)Q(C) ≤ Q(B∩C) ≤ α⁻¹ Q(B)Q(C)` for a past
/// cylinder `B` and a future cylinder `C` separated by a gap of `l`
/// steps. For a Markov chain only the boundary symbols matter, so
/// `α̂(l) = min_{i,j} min(r_ij, 1/r_ij)` with `r_ij = (T^l)_ij / π_j`.
pub fn mixing_coefficient(m: &SourceModel, l: usize, k: usize) -> Result<MixingEntry> {
    if l == 0 || k == 0 {
        return Err(Error::invalid("gap and cylinder length must be positive"));
    }
    let alpha = match m {
        SourceModel::ClassicalIid(_) => 1.0,
        SourceModel::ClassicalMarkov(c) => {
            let d = c.states();
            let tl = c.power(l);
            let mut best = 1.0f64;
            for i in (0..d).filter(|&i| c.pi()[i] > 0.0) {
                for j in (0..d).filter(|&j| c.pi()[j] > 0.0) {
                    let r = tl[i * d + j] / c.pi()[j];
                    let a = if r == 0.0 { 0.0 } else { r.min(1.0 / r) };
                    best = best.min(a);
                }
            }
            best.clamp(0.0, 1.0)
        }
        other => {
            return Err(Error::Unsupported(format!(
                "mixing coefficient of {}",
                other.label()
            )))
        }
    };
    Ok(MixingEntry { l, alpha, k })
}

pub fn mixing_report(m: &SourceModel, l_values: &[usize], k: usize) -> Result<MixingReport> {
    let alpha = l_values
        .iter()
        .map(|&l| mixing_coefficient(m, l, k).map(|e| e.alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok(MixingReport {
        l_values: l_values.to_vec(),
        alpha,
        certified_class: format!("past/future cylinders of length <= {k} (exact for all lengths under the Markov property)"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_is_exactly_independent() {
        let m = SourceModel::classical_iid(&[0.2, 0.3, 0.5]).unwrap();
        for l in 1..5 {
            assert_eq!(mixing_coefficient(&m, l, 3).unwrap().alpha, 1.0);
        }
    }

    #[test]
    fn swap_chain_has_zero_alpha() {
        let m = SourceModel::classical_markov(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let r = mixing_report(&m, &[1, 2, 3], 2).unwrap();
        assert_eq!(r.alpha, vec![0.0, 0.0, 0.0]);
        assert!(r.not_star_mixing());
    }

    #[test]
    fn lazy_chain_closed_form() {
        let m = SourceModel::classical_markov(&[vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        let mut prev = 0.0;
        for l in 1..=10 {
            let a = mixing_coefficient(&m, l, 1).unwrap().alpha;
            assert!((a - (1.0 - 0.5f64.powi(l as i32))).abs() < 1e-12);
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn quantum_models_are_rejected() {
        let q = SourceModel::quantum_iid(crate::operator::DensityOperator::maximally_mixed(2));
        assert!(mixing_coefficient(&q, 1, 1).is_err());
    }
}
