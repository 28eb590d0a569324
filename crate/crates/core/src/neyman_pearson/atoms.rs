use std::cmp::Ordering;

use super::{check_eps, TestKind, TestOutcome, CONSTRAINT_TOL};
use crate::classical::{log_sum_exp, ClassicalFrame, Selection};
use crate::ext::ExtReal;
use crate::source::{check_probability_vector, SourceModel};
use crate::{Error, Result};

/// Largest alphabet [`classical_beta_bruteforce`] enumerates.
pub const MAX_BRUTEFORCE_ALPHABET: usize = 20;

/// Above this `ln` count the boundary atom is filled fractionally; one
/// sequence is then below `e^{-36}` of the filled part.
const INTEGER_COUNT_LOG_LIMIT: f64 = 36.0;

/// Relaxed and deterministic optima on a classical frame.
#[derive(Debug, Clone)]
pub struct ClassicalBeta {
    pub relaxed: TestOutcome,
    pub deterministic: TestOutcome,
    /// The deterministic test as per-atom fractions of selected sequences.
    pub selection: Selection,
}

/// Neyman–Pearson over atoms with `ln` sizes `log_count` and per-sequence
/// `ln` probabilities `lp`, `lq`. Returns the relaxed and deterministic
/// outcomes with the deterministic atom weights.
pub(crate) fn atom_np(
    log_count: &[f64],
    lp: &[f64],
    lq: &[f64],
    eps: f64,
) -> (TestOutcome, TestOutcome, Vec<f64>) {
    let llr = |a: usize| if lq[a] == f64::NEG_INFINITY { f64::INFINITY } else { lp[a] - lq[a] };
    let mut order: Vec<usize> = (0..lp.len()).filter(|&a| lp[a] > f64::NEG_INFINITY).collect();
    order.sort_by(|&a, &b| {
        llr(b)
            .total_cmp(&llr(a))
            .then(lq[a].total_cmp(&lq[b]))
            .then(a.cmp(&b))
    });

    let target = 1.0 - eps;
    let mut weights = vec![0.0; lp.len()];
    let mut acc = 0.0;
    let mut q_terms = Vec::new();
    let mut boundary = None;
    for &a in &order {
        let mass = (log_count[a] + lp[a]).exp();
        if acc + mass >= target - CONSTRAINT_TOL {
            boundary = Some((a, mass));
            break;
        }
        acc += mass;
        weights[a] = 1.0;
        q_terms.push(log_count[a] + lq[a]);
    }

    let Some((b, mass_b)) = boundary else {
        // rounding left the whole support short of the target
        let value = ExtReal::new(log_sum_exp(q_terms.iter().copied()).min(0.0));
        let out = |kind| TestOutcome {
            value,
            type1_error: (1.0 - acc).max(0.0),
            log_threshold: ExtReal::NegInf,
            gamma: 0.0,
            kind,
        };
        return (out(TestKind::Relaxed), out(TestKind::Projection), weights);
    };

    let need = (target - acc).max(0.0);
    let log_threshold = ExtReal::new(llr(b));

    let gamma = if mass_b > 0.0 { (need / mass_b).min(1.0) } else { 0.0 };
    let relaxed_q = log_sum_exp(
        q_terms
            .iter()
            .copied()
            .chain((gamma > 0.0).then(|| gamma.ln() + log_count[b] + lq[b])),
    );
    let relaxed = TestOutcome {
        value: ExtReal::new(relaxed_q.min(0.0)),
        type1_error: (1.0 - acc - gamma * mass_b).max(0.0),
        log_threshold,
        gamma,
        kind: TestKind::Relaxed,
    };

    let (log_taken, taken_mass, fraction) = if need <= 0.0 {
        (f64::NEG_INFINITY, 0.0, 0.0)
    } else {
        let log_c = need.ln() - lp[b];
        if log_c < INTEGER_COUNT_LOG_LIMIT && log_count[b] < INTEGER_COUNT_LOG_LIMIT {
            let size = log_count[b].exp().round();
            let p_seq = lp[b].exp();
            let mut c = (log_c.exp() * (1.0 - 1e-12)).ceil().max(1.0);
            if acc + c * p_seq < target - CONSTRAINT_TOL {
                c += 1.0;
            }
            let c = c.min(size);
            (c.ln(), c * p_seq, c / size)
        } else {
            (log_c.min(log_count[b]), need.min(mass_b), gamma)
        }
    };
    if fraction > 0.0 {
        weights[b] = fraction;
    }
    let det_q = log_sum_exp(
        q_terms
            .iter()
            .copied()
            .chain((log_taken > f64::NEG_INFINITY).then(|| log_taken + lq[b])),
    );
    let deterministic = TestOutcome {
        value: ExtReal::new(det_q.min(0.0)),
        type1_error: (1.0 - acc - taken_mass).max(0.0),
        log_threshold,
        gamma: 0.0,
        kind: TestKind::Projection,
    };
    (relaxed, deterministic, weights)
}

fn log_probs(p: &[f64]) -> Vec<f64> {
    p.iter().map(|&x| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY }).collect()
}

/// Diagonal inputs: one atom per outcome.
pub(crate) fn diagonal_np(p: &[f64], q: &[f64], eps: f64) -> (TestOutcome, TestOutcome, Vec<f64>) {
    atom_np(&vec![0.0; p.len()], &log_probs(p), &log_probs(q), eps)
}

/// Optimal tests between models `p` and `q` of a frame.
pub fn classical_beta_frame(frame: &ClassicalFrame, p: usize, q: usize, eps: f64) -> Result<ClassicalBeta> {
    check_eps(eps)?;
    let (relaxed, deterministic, weights) = atom_np(frame.log_count(), frame.log_prob(p), frame.log_prob(q), eps);
    Ok(ClassicalBeta {
        relaxed,
        deterministic,
        selection: frame.selection_from_weights(weights)?,
    })
}

/// Relaxed and deterministic optima between two iid sources at block
/// length `n`, computed over type classes.
///
/// The deterministic test takes whole type classes in likelihood-ratio
/// order and an integer number of sequences from the boundary class. It is
/// optimal when `P` is uniform; otherwise it is within one boundary
/// sequence of the subset optimum.
pub fn classical_beta_iid_types(p: &SourceModel, q: &SourceModel, n: usize, eps: f64) -> Result<ClassicalBeta> {
    let iid = |m: &SourceModel| matches!(m, SourceModel::ClassicalIid(_));
    if !iid(p) || !iid(q) {
        return Err(Error::Unsupported("type-class testing needs classical iid sources".into()));
    }
    let frame = ClassicalFrame::new(&[p, q], n)?;
    classical_beta_frame(&frame, 0, 1, eps)
}

/// Exact deterministic optimum `min ln q(M)` over subsets `M` with
/// `p(M) ≥ 1 − ε`, by enumeration.
pub fn classical_beta_bruteforce(p: &[f64], q: &[f64], eps: f64) -> Result<TestOutcome> {
    check_eps(eps)?;
    check_probability_vector(p)?;
    check_probability_vector(q)?;
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    let d = p.len();
    if d > MAX_BRUTEFORCE_ALPHABET {
        return Err(Error::DimensionGuard {
            dim: 1u128 << d,
            guard: 1 << MAX_BRUTEFORCE_ALPHABET,
        });
    }
    let target = 1.0 - eps - CONSTRAINT_TOL;
    let size = 1usize << d;
    let mut pm = vec![0.0; size];
    let mut qm = vec![0.0; size];
    let mut best: Option<(f64, f64, usize)> = None;
    for mask in 0..size {
        if mask > 0 {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            pm[mask] = pm[rest] + p[low];
            qm[mask] = qm[rest] + q[low];
        }
        if pm[mask] >= target {
            let better = match best {
                None => true,
                Some((bq, bp, _)) => match qm[mask].partial_cmp(&bq).unwrap() {
                    Ordering::Less => true,
                    Ordering::Equal => pm[mask] > bp,
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((qm[mask], pm[mask], mask));
            }
        }
    }
    let (qv, pv, mask) = best.expect("the full set meets the constraint");
    let log_threshold = (0..d)
        .filter(|i| mask >> i & 1 == 1 && p[*i] > 0.0)
        .map(|i| if q[i] > 0.0 { ExtReal::Finite((p[i] / q[i]).ln()) } else { ExtReal::PosInf })
        .min()
        .unwrap_or(ExtReal::PosInf);
    Ok(TestOutcome {
        value: ExtReal::ln(qv.max(0.0)),
        type1_error: (1.0 - pv).max(0.0),
        log_threshold,
        gamma: 0.0,
        kind: TestKind::Subset,
    })
}
