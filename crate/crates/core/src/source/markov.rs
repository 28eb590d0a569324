use serde::Serialize;

use super::check_probability_vector;
use crate::{Error, Result};

const STATIONARITY_TOL: f64 = 1e-9;

/// A finite-state Markov chain with a stationary initial distribution.
///
/// The transition matrix is row-stochastic and stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarkovChain {
    pi: Vec<f64>,
    transition: Vec<f64>,
    states: usize,
}

impl MarkovChain {
    /// Builds the chain and solves `πT = π` for its initial distribution.
    /// Reducible chains with several closed classes get the uniform average
    /// of the per-class stationary vectors.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let (transition, states) = flatten_stochastic(rows)?;
        let pi = stationary_vector(&transition, states)?;
        Ok(MarkovChain {
            pi,
            transition,
            states,
        })
    }

    /// Builds the chain from a supplied initial distribution, which must be
    /// stationary within 1e-9.
    pub fn with_stationary(pi: &[f64], rows: &[Vec<f64>]) -> Result<Self> {
        let (transition, states) = flatten_stochastic(rows)?;
        if pi.len() != states {
            return Err(Error::DimensionMismatch(pi.len(), states));
        }
        check_probability_vector(pi)?;
        let chain = MarkovChain {
            pi: pi.to_vec(),
            transition,
            states,
        };
        let residual = chain.stationarity_residual();
        if residual > STATIONARITY_TOL {
            return Err(Error::invalid(format!(
                "initial distribution is not stationary (residual {residual:e})"
            )));
        }
        Ok(chain)
    }

    /// Skips the stationarity check. Only useful for fixtures that need a
    /// deliberately non-stationary start.
    #[doc(hidden)]
    pub fn unchecked(pi: &[f64], rows: &[Vec<f64>]) -> Result<Self> {
        let (transition, states) = flatten_stochastic(rows)?;
        check_probability_vector(pi)?;
        Ok(MarkovChain {
            pi: pi.to_vec(),
            transition,
            states,
        })
    }

    /// The iid process as a chain whose rows all equal `p`.
    pub fn iid(p: &[f64]) -> Self {
        let d = p.len();
        MarkovChain {
            pi: p.to_vec(),
            transition: (0..d).flat_map(|_| p.iter().copied()).collect(),
            states: d,
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn t(&self, i: usize, j: usize) -> f64 {
        self.transition[i * self.states + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.transition[i * self.states..(i + 1) * self.states]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.states).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn stationarity_residual(&self) -> f64 {
        (0..self.states)
            .map(|j| {
                let s: f64 = (0..self.states).map(|i| self.pi[i] * self.t(i, j)).sum();
                (s - self.pi[j]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `T^l`, row-major.
    pub fn power(&self, l: usize) -> Vec<f64> {
        let d = self.states;
        let mut acc: Vec<f64> = (0..d * d).map(|k| if k / d == k % d { 1.0 } else { 0.0 }).collect();
        for _ in 0..l {
            let mut next = vec![0.0; d * d];
            for i in 0..d {
                for k in 0..d {
                    let a = acc[i * d + k];
                    if a == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        next[i * d + j] += a * self.t(k, j);
                    }
                }
            }
            acc = next;
        }
        acc
    }

    fn reachability(&self) -> Vec<Vec<bool>> {
        let d = self.states;
        let mut r: Vec<Vec<bool>> = (0..d)
            .map(|i| (0..d).map(|j| i == j || self.t(i, j) > 0.0).collect())
            .collect();
        for k in 0..d {
            for i in 0..d {
                if r[i][k] {
                    for j in 0..d {
                        if r[k][j] {
                            r[i][j] = true;
                        }
                    }
                }
            }
        }
        r
    }

    /// Communicating classes, each flagged as closed or not.
    pub fn classes(&self) -> Vec<(Vec<usize>, bool)> {
        let d = self.states;
        let r = self.reachability();
        let mut seen = vec![false; d];
        let mut out = Vec::new();
        for i in 0..d {
            if seen[i] {
                continue;
            }
            let class: Vec<usize> = (0..d).filter(|&j| r[i][j] && r[j][i]).collect();
            for &j in &class {
                seen[j] = true;
            }
            let closed = class
                .iter()
                .all(|&a| (0..d).all(|b| self.t(a, b) == 0.0 || class.contains(&b)));
            out.push((class, closed));
        }
        out
    }

    pub fn is_irreducible(&self) -> bool {
        self.classes().len() == 1
    }

    /// Period of an irreducible chain together with the cyclic class index
    /// of every state.
    pub fn period(&self) -> Result<(usize, Vec<usize>)> {
        if !self.is_irreducible() {
            return Err(Error::Unsupported("period of a reducible chain".into()));
        }
        let d = self.states;
        // BFS levels from state 0; the period is the gcd of level[i]+1−level[j]
        // over all edges i→j.
        let mut level = vec![usize::MAX; d];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for j in 0..d {
                if self.t(i, j) > 0.0 && level[j] == usize::MAX {
                    level[j] = level[i] + 1;
                    queue.push_back(j);
                }
            }
        }
        let mut g = 0usize;
        for i in 0..d {
            for j in 0..d {
                if self.t(i, j) > 0.0 {
                    let diff = (level[i] + 1).abs_diff(level[j]);
                    g = gcd(g, diff);
                }
            }
        }
        let p = g.max(1);
        Ok((p, level.iter().map(|l| l % p).collect()))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn flatten_stochastic(rows: &[Vec<f64>]) -> Result<(Vec<f64>, usize)> {
    let d = rows.len();
    if d == 0 {
        return Err(Error::invalid("transition matrix is empty"));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::invalid(format!("transition row {i} has {} entries, expected {d}", row.len())));
        }
        check_probability_vector(row).map_err(|e| Error::Probability(format!("transition row {i}: {e}")))?;
    }
    Ok((rows.iter().flatten().copied().collect(), d))
}

/// Stationary vector by direct solve of `π(T − I) = 0, Σπ = 1` on each
/// closed class, averaged uniformly over closed classes.
fn stationary_vector(t: &[f64], d: usize) -> Result<Vec<f64>> {
    let probe = MarkovChain {
        pi: vec![1.0 / d as f64; d],
        transition: t.to_vec(),
        states: d,
    };
    let closed: Vec<Vec<usize>> = probe
        .classes()
        .into_iter()
        .filter(|(_, closed)| *closed)
        .map(|(c, _)| c)
        .collect();
    let mut pi = vec![0.0; d];
    for class in &closed {
        let k = class.len();
        // rows: equations Σ_i π_i (T_ij − δ_ij) = 0 for j in class, last replaced by Σπ = 1
        let mut a = vec![vec![0.0; k]; k];
        let mut b = vec![0.0; k];
        for (r, &j) in class.iter().enumerate() {
            for (c, &i) in class.iter().enumerate() {
                a[r][c] = t[i * d + j] - if i == j { 1.0 } else { 0.0 };
            }
        }
        a[k - 1] = vec![1.0; k];
        b[k - 1] = 1.0;
        let sol = solve(a, b).ok_or_else(|| Error::invalid("stationary distribution solve is singular"))?;
        for (c, &i) in class.iter().enumerate() {
            pi[i] += sol[c].max(0.0) / closed.len() as f64;
        }
    }
    let s: f64 = pi.iter().sum();
    Ok(pi.into_iter().map(|x| x / s).collect())
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_of_asymmetric_chain() {
        let c = MarkovChain::new(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        assert!((c.pi()[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!(c.stationarity_residual() < 1e-15);
    }

    #[test]
    fn periodic_and_reducible_chains_are_accepted() {
        let swap = MarkovChain::new(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(swap.pi(), &[0.5, 0.5]);
        assert_eq!(swap.period().unwrap(), (2, vec![0, 1]));
        let frozen = MarkovChain::new(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(frozen.pi(), &[0.5, 0.5]);
        assert!(!frozen.is_irreducible());
        assert!(frozen.period().is_err());
        let transient = MarkovChain::new(&[vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        assert_eq!(transient.pi(), &[0.0, 1.0]);
    }

    #[test]
    fn rejects_non_stationary_start() {
        let rows = [vec![0.9, 0.1], vec![0.2, 0.8]];
        assert!(MarkovChain::with_stationary(&[0.5, 0.5], &rows).is_err());
        assert!(MarkovChain::with_stationary(&[2.0 / 3.0, 1.0 / 3.0], &rows).is_ok());
        assert!(MarkovChain::new(&[vec![0.9, 0.2], vec![0.2, 0.8]]).is_err());
    }

    #[test]
    fn matrix_power() {
        let lazy = MarkovChain::new(&[vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        let t2 = lazy.power(2);
        assert!((t2[0] - 0.625).abs() < 1e-15 && (t2[1] - 0.375).abs() < 1e-15);
    }
}
