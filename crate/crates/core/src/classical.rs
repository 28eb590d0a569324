//! Exact computations on classical `n`-site marginals without enumerating
//! the `d^n` outcomes when the models allow it.
//!
//! A [`ClassicalFrame`] partitions `A^n` into atoms on which every model of
//! a fixed family assigns the same probability to each sequence: type
//! classes when all models are iid (or mixtures of iid sources), single
//! sequences otherwise. Diagonal projectors become per-atom weights in
//! `[0, 1]`, the fraction of the atom's sequences selected. Everything is
//! kept in log space, since path probabilities underflow long before the
//! interesting block lengths.

use std::sync::Arc;

use serde::Serialize;

use crate::ext::ExtReal;
use crate::source::{SourceModel, MAX_CLASSICAL_OUTCOMES};
use crate::{Error, Result};

/// Largest number of atoms a frame materializes.
pub const MAX_ATOMS: usize = 1 << 22;

/// `ln Σ exp(x_i)` over finite terms; `−∞` for an empty or all-`−∞` input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().filter(|x| *x > f64::NEG_INFINITY).collect();
    let Some(m) = xs.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomKind {
    /// Atoms are type classes; `types[a]` holds the symbol counts.
    Types(Vec<Vec<u32>>),
    /// Atoms are single sequences, indexed first site most significant.
    Sequences,
}

impl AtomKind {
    /// Human-readable key of an atom: its type counts or sequence index.
    pub fn key(&self, a: usize) -> serde_json::Value {
        match self {
            AtomKind::Types(t) => serde_json::json!(t[a]),
            AtomKind::Sequences => serde_json::json!(a),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassicalFrame {
    n: usize,
    alphabet: usize,
    kind: Arc<AtomKind>,
    log_count: Vec<f64>,
    log_prob: Vec<Vec<f64>>,
}

/// A diagonal projector (or, with fractional weights, a diagonal test) in
/// frame coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    weights: Vec<f64>,
}

impl Selection {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }

    /// Whether every atom is either fully in or fully out.
    pub fn is_projector(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0 || w == 1.0)
    }

    /// Join of projectors: union of selected sequences.
    pub fn join(&self, other: &Selection) -> Selection {
        assert_eq!(self.len(), other.len());
        debug_assert!(self.is_projector() && other.is_projector());
        Selection {
            weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a.max(*b)).collect(),
        }
    }

    /// Meet (product) of commuting projectors.
    pub fn meet(&self, other: &Selection) -> Selection {
        assert_eq!(self.len(), other.len());
        debug_assert!(self.is_projector() && other.is_projector());
        Selection {
            weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a.min(*b)).collect(),
        }
    }

    /// Sum of mutually orthogonal projectors.
    pub fn disjoint_sum(parts: &[Selection]) -> Selection {
        let len = parts.first().map_or(0, Selection::len);
        let mut weights = vec![0.0; len];
        for p in parts {
            for (w, x) in weights.iter_mut().zip(&p.weights) {
                *w += x;
            }
        }
        debug_assert!(weights.iter().all(|&w| w <= 1.0));
        Selection { weights }
    }

    /// Whether the selections select disjoint sets of sequences.
    pub fn orthogonal(&self, other: &Selection) -> bool {
        self.weights.iter().zip(&other.weights).all(|(a, b)| *a == 0.0 || *b == 0.0)
    }
}

impl ClassicalFrame {
    /// Frame for the `n`-site marginals of `models`, which must be classical
    /// over one alphabet.
    pub fn new(models: &[&SourceModel], n: usize) -> Result<Self> {
        let first = models
            .first()
            .ok_or_else(|| Error::invalid("frame needs at least one model"))?;
        if n == 0 {
            return Err(Error::invalid("marginals need n >= 1"));
        }
        let alphabet = first.site().dim;
        for m in models {
            if !m.is_classical() {
                return Err(Error::Unsupported(format!("{} is not classical", m.label())));
            }
            if m.site().dim != alphabet {
                return Err(Error::DimensionMismatch(alphabet, m.site().dim));
            }
        }
        if models.iter().all(|m| m.is_iid_or_iid_mixture()) {
            Self::types(models, n, alphabet)
        } else {
            Self::sequences(models, n, alphabet)
        }
    }

    fn types(models: &[&SourceModel], n: usize, d: usize) -> Result<Self> {
        let count = compositions(n, d);
        if count > MAX_ATOMS as u128 {
            return Err(Error::DimensionGuard {
                dim: count,
                guard: MAX_ATOMS,
            });
        }
        let mut lfact = vec![0.0f64; n + 1];
        for k in 1..=n {
            lfact[k] = lfact[k - 1] + (k as f64).ln();
        }
        let mut types = Vec::with_capacity(count as usize);
        let mut cur = vec![0u32; d];
        enumerate_types(n as u32, 0, &mut cur, &mut types);
        let log_count = types
            .iter()
            .map(|t| lfact[n] - t.iter().map(|&k| lfact[k as usize]).sum::<f64>())
            .collect();
        let log_prob = models
            .iter()
            .map(|m| {
                let comps = iid_components(m);
                types
                    .iter()
                    .map(|t| log_sum_exp(comps.iter().map(|(w, p)| w.ln() + type_log_prob(t, p))))
                    .collect()
            })
            .collect();
        Ok(ClassicalFrame {
            n,
            alphabet: d,
            kind: Arc::new(AtomKind::Types(types)),
            log_count,
            log_prob,
        })
    }

    fn sequences(models: &[&SourceModel], n: usize, d: usize) -> Result<Self> {
        let size = crate::operator::checked_pow(d, n);
        let guard = MAX_ATOMS.min(MAX_CLASSICAL_OUTCOMES);
        if size > guard as u128 {
            return Err(Error::DimensionGuard { dim: size, guard });
        }
        let log_prob = models
            .iter()
            .map(|m| sequence_log_probs(m, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(ClassicalFrame {
            n,
            alphabet: d,
            kind: Arc::new(AtomKind::Sequences),
            log_count: vec![0.0; size as usize],
            log_prob,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn kind(&self) -> &Arc<AtomKind> {
        &self.kind
    }

    pub fn atoms(&self) -> usize {
        self.log_count.len()
    }

    pub fn models(&self) -> usize {
        self.log_prob.len()
    }

    /// `ln` of the number of sequences in each atom.
    pub fn log_count(&self) -> &[f64] {
        &self.log_count
    }

    /// Per-sequence `ln` probability under model `k`, for every atom.
    pub fn log_prob(&self, k: usize) -> &[f64] {
        &self.log_prob[k]
    }

    pub fn full(&self) -> Selection {
        Selection {
            weights: vec![1.0; self.atoms()],
        }
    }

    pub fn none(&self) -> Selection {
        Selection {
            weights: vec![0.0; self.atoms()],
        }
    }

    pub fn select(&self, keep: impl Fn(usize) -> bool) -> Selection {
        Selection {
            weights: (0..self.atoms()).map(|a| if keep(a) { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn selection_from_weights(&self, weights: Vec<f64>) -> Result<Selection> {
        if weights.len() != self.atoms() {
            return Err(Error::DimensionMismatch(weights.len(), self.atoms()));
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::invalid("selection weights must lie in [0, 1]"));
        }
        Ok(Selection { weights })
    }

    /// Per-site rate `−(1/n) ln λ` of each atom's eigenvalue under model `k`
    /// (`+∞` where the probability vanishes).
    pub fn rates(&self, k: usize) -> Vec<ExtReal> {
        let n = self.n as f64;
        self.log_prob[k]
            .iter()
            .map(|&lp| if lp == f64::NEG_INFINITY { ExtReal::PosInf } else { ExtReal::Finite(-lp / n) })
            .collect()
    }

    /// `ln` of the model-`k` mass of a selection.
    pub fn log_mass(&self, k: usize, sel: &Selection) -> ExtReal {
        let lp = &self.log_prob[k];
        ExtReal::new(log_sum_exp((0..self.atoms()).filter(|&a| sel.weights[a] > 0.0).map(|a| {
            sel.weights[a].ln() + self.log_count[a] + lp[a]
        })))
    }

    /// Model-`k` mass of a selection, clamped to `[0, 1]`.
    pub fn mass(&self, k: usize, sel: &Selection) -> f64 {
        self.log_mass(k, sel).to_f64().exp().clamp(0.0, 1.0)
    }

    /// `ln` of the number of selected sequences (the projector's rank).
    pub fn log_rank(&self, sel: &Selection) -> ExtReal {
        ExtReal::new(log_sum_exp(
            (0..self.atoms())
                .filter(|&a| sel.weights[a] > 0.0)
                .map(|a| sel.weights[a].ln() + self.log_count[a]),
        ))
    }

    /// `KL(P_j^(n) ‖ P_k^(n))`.
    pub fn relative_entropy(&self, j: usize, k: usize) -> ExtReal {
        let (pj, pk) = (&self.log_prob[j], &self.log_prob[k]);
        let mut acc = 0.0;
        for a in 0..self.atoms() {
            if pj[a] == f64::NEG_INFINITY {
                continue;
            }
            let w = (self.log_count[a] + pj[a]).exp();
            if pk[a] == f64::NEG_INFINITY {
                if w > 0.0 {
                    return ExtReal::PosInf;
                }
                continue;
            }
            acc += w * (pj[a] - pk[a]);
        }
        ExtReal::Finite(acc.max(0.0))
    }
}

fn compositions(n: usize, d: usize) -> u128 {
    // C(n + d − 1, d − 1)
    let mut c: u128 = 1;
    for i in 1..d as u128 {
        c = c.saturating_mul(n as u128 + i) / i;
    }
    c
}

fn enumerate_types(left: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k;
        enumerate_types(left - k, pos + 1, cur, out);
    }
}

fn type_log_prob(t: &[u32], p: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&k, &pa) in t.iter().zip(p) {
        if k == 0 {
            continue;
        }
        if pa == 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += k as f64 * pa.ln();
    }
    acc
}

fn iid_components(m: &SourceModel) -> Vec<(f64, Vec<f64>)> {
    match m {
        SourceModel::ClassicalIid(p) => vec![(1.0, p.as_slice().to_vec())],
        SourceModel::FiniteMixture(mix) => mix
            .weights()
            .iter()
            .zip(mix.components())
            .filter(|(w, _)| **w > 0.0)
            .flat_map(|(w, c)| iid_components(c).into_iter().map(move |(v, p)| (w * v, p)))
            .collect(),
        _ => unreachable!("checked by is_iid_or_iid_mixture"),
    }
}

fn sequence_log_probs(m: &SourceModel, n: usize) -> Result<Vec<f64>> {
    if let SourceModel::FiniteMixture(mix) = m {
        let parts = mix
            .components()
            .iter()
            .zip(mix.weights())
            .filter(|(_, w)| **w > 0.0)
            .map(|(c, w)| sequence_log_probs(c, n).map(|v| (w.ln(), v)))
            .collect::<Result<Vec<_>>>()?;
        let len = parts[0].1.len();
        return Ok((0..len)
            .map(|i| log_sum_exp(parts.iter().map(|(lw, v)| lw + v[i])))
            .collect());
    }
    let chain = m
        .as_markov()
        .ok_or_else(|| Error::Unsupported(format!("{} has no path measure", m.label())))?;
    let d = chain.states();
    let ln = |x: f64| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
    let log_t: Vec<f64> = (0..d * d).map(|k| ln(chain.t(k / d, k % d))).collect();
    let mut lp: Vec<f64> = chain.pi().iter().map(|&x| ln(x)).collect();
    for _ in 1..n {
        let mut next = Vec::with_capacity(lp.len() * d);
        for (idx, &w) in lp.iter().enumerate() {
            let last = idx % d;
            next.extend((0..d).map(|x| w + log_t[last * d + x]));
        }
        lp = next;
    }
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::marginal_distribution;

    #[test]
    fn type_frame_masses_sum_to_one() {
        let p = SourceModel::bernoulli(0.3).unwrap();
        let q = SourceModel::bernoulli(0.5).unwrap();
        let f = ClassicalFrame::new(&[&p, &q], 512).unwrap();
        assert_eq!(f.atoms(), 513);
        assert!((f.mass(0, &f.full()) - 1.0).abs() < 1e-12);
        assert!((f.log_rank(&f.full()).to_f64() - 512.0 * 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn frames_agree_with_explicit_marginals() {
        let p = SourceModel::classical_iid(&[0.2, 0.5, 0.3]).unwrap();
        let f = ClassicalFrame::new(&[&p], 4).unwrap();
        assert_eq!(f.atoms(), 15);
        let s = SourceModel::classical_markov(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let g = ClassicalFrame::new(&[&s], 6).unwrap();
        let direct = marginal_distribution(&s, 6).unwrap();
        for (lp, x) in g.log_prob(0).iter().zip(&direct) {
            assert!((lp.exp() - x).abs() < 1e-15);
        }
    }

    #[test]
    fn mixture_of_iid_uses_types() {
        let m = SourceModel::finite_mixture(
            &[0.5, 0.5],
            vec![SourceModel::bernoulli(1.0).unwrap(), SourceModel::bernoulli(0.5).unwrap()],
        )
        .unwrap();
        let f = ClassicalFrame::new(&[&m], 10).unwrap();
        assert!(matches!(**f.kind(), AtomKind::Types(_)));
        // all-zero string: ½ + ½·2^{−10}
        let expected = 0.5 + 0.5 * 2f64.powi(-10);
        assert!((f.log_prob(0)[0].exp() - expected).abs() < 1e-15);
    }

    #[test]
    fn relative_entropy_is_additive() {
        let p = SourceModel::bernoulli(0.5).unwrap();
        let q = SourceModel::bernoulli(0.25).unwrap();
        let f = ClassicalFrame::new(&[&p, &q], 100).unwrap();
        assert!((f.relative_entropy(0, 1).to_f64() - 100.0 * 0.1438410362258904).abs() < 1e-10);
        let z = SourceModel::bernoulli(1.0).unwrap();
        let g = ClassicalFrame::new(&[&p, &z], 3).unwrap();
        assert_eq!(g.relative_entropy(0, 1), ExtReal::PosInf);
        assert!(g.relative_entropy(1, 0).is_finite());
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp([]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!((log_sum_exp([-1000.0, -1000.0]) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
