use std::ops::Range;

use faer::{c64, Mat, MatRef, Side};

use super::hermitian::{HermitianOperator, Projector};
use crate::{Error, Result};

/// Full eigendecomposition of a Hermitian operator: eigenvalues in
/// descending order with orthonormal eigenvectors as columns.
///
/// Real symmetric inputs go through the real solver and keep real
/// eigenvectors, which halves the cost of every later quadratic form.
#[derive(Clone, Debug)]
pub struct Eigen {
    values: Vec<f64>,
    vectors: Mat<c64>,
    real: bool,
}

impl Eigen {
    pub fn of(h: &HermitianOperator) -> Result<Self> {
        let d = h.dim();
        if h.is_diagonal(0.0) {
            let diag = h.diag();
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&a, &b| diag[b].total_cmp(&diag[a]).then(a.cmp(&b)));
            let values = order.iter().map(|&i| diag[i]).collect();
            let vectors = Mat::from_fn(d, d, |i, k| {
                c64::new(if order[k] == i { 1.0 } else { 0.0 }, 0.0)
            });
            return Ok(Eigen {
                values,
                vectors,
                real: true,
            });
        }
        if h.is_real() {
            let m = h.as_mat();
            let r = Mat::<f64>::from_fn(d, d, |i, j| m[(i, j)].re);
            let evd = r.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
            let s = evd.S().column_vector();
            let u = evd.U();
            // faer returns ascending order
            let values = (0..d).rev().map(|k| s[k]).collect();
            let vectors = Mat::from_fn(d, d, |i, k| c64::new(u[(i, d - 1 - k)], 0.0));
            Ok(Eigen {
                values,
                vectors,
                real: true,
            })
        } else {
            let evd = h
                .as_mat()
                .self_adjoint_eigen(Side::Lower)
                .map_err(|_| Error::Eigen)?;
            let s = evd.S().column_vector();
            let u = evd.U();
            let values = (0..d).rev().map(|k| s[k].re).collect();
            let vectors = Mat::from_fn(d, d, |i, k| u[(i, d - 1 - k)]);
            Ok(Eigen {
                values,
                vectors,
                real: false,
            })
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalues, descending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> MatRef<'_, c64> {
        self.vectors.as_ref()
    }

    /// Projector onto the span of the eigenvectors with the given indices.
    pub fn projector(&self, indices: &[usize]) -> Projector {
        let d = self.dim();
        if indices.is_empty() {
            return Projector::zero(d);
        }
        let op = if self.real {
            let vs = Mat::<f64>::from_fn(d, indices.len(), |i, k| self.vectors[(i, indices[k])].re);
            let p = vs.as_ref() * vs.transpose();
            HermitianOperator::symmetrized(Mat::from_fn(d, d, |i, j| c64::new(p[(i, j)], 0.0)))
        } else {
            let vs = Mat::from_fn(d, indices.len(), |i, k| self.vectors[(i, indices[k])]);
            HermitianOperator::symmetrized(vs.as_ref() * vs.adjoint())
        };
        Projector::from_parts(op, indices.len())
    }

    /// Projector onto the eigenvectors whose eigenvalue satisfies `keep`.
    pub fn projector_where(&self, keep: impl Fn(f64) -> bool) -> Projector {
        let idx: Vec<usize> = (0..self.dim()).filter(|&k| keep(self.values[k])).collect();
        self.projector(&idx)
    }

    /// `⟨v_k|X|v_k⟩` for every eigenvector `v_k`.
    pub fn quad_forms(&self, x: &HermitianOperator) -> Vec<f64> {
        let d = self.dim();
        assert_eq!(d, x.dim());
        if x.is_diagonal(0.0) {
            let diag = x.diag();
            return (0..d)
                .map(|k| (0..d).map(|i| diag[i] * self.vectors[(i, k)].norm_sqr()).sum())
                .collect();
        }
        if self.real && x.is_real() {
            let xm = x.as_mat();
            let xr = Mat::<f64>::from_fn(d, d, |i, j| xm[(i, j)].re);
            let v = Mat::<f64>::from_fn(d, d, |i, k| self.vectors[(i, k)].re);
            let w = xr.as_ref() * v.as_ref();
            (0..d)
                .map(|k| (0..d).map(|i| v[(i, k)] * w[(i, k)]).sum())
                .collect()
        } else {
            let w = x.as_mat() * self.vectors.as_ref();
            (0..d)
                .map(|k| {
                    (0..d)
                        .map(|i| (self.vectors[(i, k)].conj() * w[(i, k)]).re)
                        .sum()
                })
                .collect()
        }
    }

    /// `f(H) = Σ f(λ_k) v_k v_k*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let d = self.dim();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let scaled = Mat::from_fn(d, d, |i, k| self.vectors[(i, k)] * fv[k]);
        HermitianOperator::symmetrized(scaled.as_ref() * self.vectors.adjoint())
    }

    /// Groups eigenvalues within `tol·max(1, |λ_max|)` of their neighbour.
    pub fn groups(&self, tol: f64) -> Vec<Range<usize>> {
        let scale = self
            .values
            .iter()
            .fold(1.0f64, |m, v| m.max(v.abs()));
        let mut out = Vec::new();
        let mut start = 0;
        for k in 1..=self.dim() {
            if k == self.dim() || self.values[k - 1] - self.values[k] > tol * scale {
                out.push(start..k);
                start = k;
            }
        }
        out
    }
}

/// Distinct eigenvalues (descending) and the matching eigen-projections.
///
/// Projections are materialized on demand: a tensor power of dimension 1024
/// can have hundreds of groups and storing each as a dense matrix would not
/// fit in memory.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigen: Eigen,
    groups: Vec<Range<usize>>,
    eigenvalues: Vec<f64>,
    grouping_tol: f64,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn grouping_tol(&self) -> f64 {
        self.grouping_tol
    }

    pub fn multiplicity(&self, i: usize) -> usize {
        self.groups[i].len()
    }

    /// The eigen-projection `spec_λ` of the `i`-th distinct eigenvalue.
    pub fn projection(&self, i: usize) -> Projector {
        let idx: Vec<usize> = self.groups[i].clone().collect();
        self.eigen.projector(&idx)
    }

    pub fn projections(&self) -> Vec<Projector> {
        (0..self.len()).map(|i| self.projection(i)).collect()
    }

    /// Sum of the eigen-projections whose eigenvalue satisfies `keep`.
    pub fn projection_where(&self, keep: impl Fn(f64) -> bool) -> Projector {
        let idx: Vec<usize> = self
            .groups
            .iter()
            .zip(&self.eigenvalues)
            .filter(|(_, &l)| keep(l))
            .flat_map(|(g, _)| g.clone())
            .collect();
        self.eigen.projector(&idx)
    }

    pub fn eigen(&self) -> &Eigen {
        &self.eigen
    }

    /// `Σ λ_i P_i`.
    pub fn reconstruct(&self) -> HermitianOperator {
        let mut per_vector = vec![0.0; self.eigen.dim()];
        for (g, &l) in self.groups.iter().zip(&self.eigenvalues) {
            for k in g.clone() {
                per_vector[k] = l;
            }
        }
        let d = self.eigen.dim();
        let v = &self.eigen.vectors;
        let scaled = Mat::from_fn(d, d, |i, k| v[(i, k)] * per_vector[k]);
        HermitianOperator::symmetrized(scaled.as_ref() * v.adjoint())
    }
}

/// Eigendecomposition with eigenvalues grouped when they agree within
/// `grouping_tol·max(1, |λ_max|)`. The group's eigenvalue is the mean of its
/// members.
pub fn hermitian_eig(h: &HermitianOperator, grouping_tol: f64) -> Result<SpectralDecomposition> {
    if !(grouping_tol > 0.0) {
        return Err(Error::invalid("grouping tolerance must be positive"));
    }
    let eigen = Eigen::of(h)?;
    let groups = eigen.groups(grouping_tol);
    let eigenvalues = groups
        .iter()
        .map(|g| eigen.values[g.clone()].iter().sum::<f64>() / g.len() as f64)
        .collect();
    Ok(SpectralDecomposition {
        eigen,
        groups,
        eigenvalues,
        grouping_tol,
    })
}
