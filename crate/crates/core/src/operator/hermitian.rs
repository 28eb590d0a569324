use faer::{c64, Mat, MatRef};

use super::spectral::Eigen;
use crate::{Error, Result};

/// Residual above which an input is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Eigenvalues in `[-PSD_TOL, 0)` are read as zero; anything lower is an error.
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PROJECTOR_TOL: f64 = 1e-9;

/// A dense Hermitian matrix.
///
/// Inputs are checked to be Hermitian within [`HERMITIAN_TOL`] and then
/// symmetrized, so the stored matrix is exactly self-adjoint.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    mat: Mat<c64>,
    real: bool,
}

impl HermitianOperator {
    pub fn from_mat(mat: Mat<c64>) -> Result<Self> {
        let (r, c) = (mat.nrows(), mat.ncols());
        if r != c {
            return Err(Error::NotSquare(r, c));
        }
        if r == 0 {
            return Err(Error::invalid("operator dimension must be at least 1"));
        }
        let mut residual = 0.0f64;
        for j in 0..r {
            for i in 0..=j {
                let d = mat[(i, j)] - mat[(j, i)].conj();
                residual = residual.max(d.norm());
            }
        }
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian(residual));
        }
        Ok(Self::symmetrized(mat))
    }

    /// Builds from a closure; the closure is evaluated on every entry.
    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Result<Self> {
        Self::from_mat(Mat::from_fn(dim, dim, f))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("rows must form a square matrix"));
        }
        Self::from_fn(d, |i, j| c64::new(rows[i][j], 0.0))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("operator dimension must be at least 1"));
        }
        Ok(Self::from_diag_unchecked(values))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag_unchecked(&vec![1.0; dim])
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_diag_unchecked(&vec![0.0; dim])
    }

    pub(crate) fn from_diag_unchecked(values: &[f64]) -> Self {
        let d = values.len();
        let mat = Mat::from_fn(d, d, |i, j| {
            if i == j {
                c64::new(values[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        HermitianOperator { mat, real: true }
    }

    /// Averages with the adjoint; callers guarantee the input is Hermitian
    /// up to rounding.
    pub(crate) fn symmetrized(mut mat: Mat<c64>) -> Self {
        let d = mat.nrows();
        let mut real = true;
        for j in 0..d {
            for i in 0..j {
                let avg = (mat[(i, j)] + mat[(j, i)].conj()) * 0.5;
                mat[(i, j)] = avg;
                mat[(j, i)] = avg.conj();
                real &= avg.im == 0.0;
            }
            mat[(j, j)] = c64::new(mat[(j, j)].re, 0.0);
        }
        HermitianOperator { mat, real }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.mat[(i, j)]
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.mat
    }

    /// True when every entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|j| (0..d).all(|i| i == j || self.mat[(i, j)].norm() <= tol))
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        let mat = Mat::from_fn(self.dim(), self.dim(), |i, j| {
            self.mat[(i, j)] * a + other.mat[(i, j)] * b
        });
        Ok(HermitianOperator {
            mat,
            real: self.real && other.real,
        })
    }

    pub fn scale(&self, a: f64) -> Self {
        HermitianOperator {
            mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * a),
            real: self.real,
        }
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                m = m.max((self.mat[(i, j)] - other.mat[(i, j)]).norm());
            }
        }
        m
    }

    /// Product `self·other`; not Hermitian in general.
    pub fn product(&self, other: &Self) -> Mat<c64> {
        self.mat.as_ref() * other.mat.as_ref()
    }

    /// `x·self·x` for Hermitian `x`, symmetrized.
    pub fn sandwich(&self, x: &Self) -> Result<Self> {
        check_dims(self.dim(), x.dim())?;
        let m = x.mat.as_ref() * self.mat.as_ref() * x.mat.as_ref();
        Ok(Self::symmetrized(m))
    }

    /// Entrywise max-norm of the commutator `[self, other]`.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        let ab = self.product(other);
        let ba = other.product(self);
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                m = m.max((ab[(i, j)] - ba[(i, j)]).norm());
            }
        }
        m
    }

    pub fn eigen(&self) -> Result<Eigen> {
        Eigen::of(self)
    }
}

pub(crate) fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::DimensionMismatch(a, b))
    } else {
        Ok(())
    }
}

/// A positive semidefinite, trace-one operator.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    /// Validates positivity (eigenvalues ≥ −1e-10) and unit trace.
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Trace(tr));
        }
        let min = if op.is_diagonal(0.0) {
            op.diag().into_iter().fold(f64::INFINITY, f64::min)
        } else {
            op.eigen()?.values().iter().copied().fold(f64::INFINITY, f64::min)
        };
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(DensityOperator { op })
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        crate::source::check_probability_vector(probs)?;
        Ok(DensityOperator {
            op: HermitianOperator::from_diag_unchecked(probs),
        })
    }

    /// The rank-one state `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn pure(v: &[c64]) -> Result<Self> {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if v.is_empty() || norm2 == 0.0 {
            return Err(Error::invalid("pure state vector must be nonzero"));
        }
        let mat = Mat::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj() * (1.0 / norm2));
        Ok(DensityOperator {
            op: HermitianOperator::symmetrized(mat),
        })
    }

    pub fn pure_real(v: &[f64]) -> Result<Self> {
        let v: Vec<c64> = v.iter().map(|&x| c64::new(x, 0.0)).collect();
        Self::pure(&v)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            op: HermitianOperator::from_diag_unchecked(&vec![1.0 / dim as f64; dim]),
        }
    }

    pub(crate) fn new_unchecked(op: HermitianOperator) -> Self {
        DensityOperator { op }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Convex combination `Σ w_i ρ_i`.
    pub fn mixture(weights: &[f64], states: &[DensityOperator]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::invalid("mixture needs one weight per state"));
        }
        crate::source::check_probability_vector(weights)?;
        let mut acc = HermitianOperator::zero(states[0].dim());
        for (w, s) in weights.iter().zip(states) {
            acc = acc.lin_comb(1.0, &s.op, *w)?;
        }
        Ok(DensityOperator { op: acc })
    }
}

impl AsRef<HermitianOperator> for DensityOperator {
    fn as_ref(&self) -> &HermitianOperator {
        &self.op
    }
}

/// A Hermitian idempotent.
#[derive(Clone, Debug)]
pub struct Projector {
    op: HermitianOperator,
    rank: usize,
}

impl Projector {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let p2 = HermitianOperator::symmetrized(op.product(&op));
        let residual = p2.max_abs_diff(&op);
        if residual > PROJECTOR_TOL {
            return Err(Error::NotProjector(residual));
        }
        let tr = op.trace();
        let rank = tr.round();
        if (tr - rank).abs() > 1e-6 {
            return Err(Error::NotProjector((tr - rank).abs()));
        }
        Ok(Projector {
            op,
            rank: rank as usize,
        })
    }

    pub(crate) fn from_parts(op: HermitianOperator, rank: usize) -> Self {
        Projector { op, rank }
    }

    pub fn zero(dim: usize) -> Self {
        Projector {
            op: HermitianOperator::zero(dim),
            rank: 0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Projector {
            op: HermitianOperator::identity(dim),
            rank: dim,
        }
    }

    /// Coordinate projector onto the basis vectors in `indices`.
    pub fn coordinate(dim: usize, indices: &[usize]) -> Self {
        let mut diag = vec![0.0; dim];
        for &i in indices {
            diag[i] = 1.0;
        }
        let rank = diag.iter().filter(|&&x| x == 1.0).count();
        Projector {
            op: HermitianOperator::from_diag_unchecked(&diag),
            rank,
        }
    }

    /// Rank-one projector onto the span of `v`.
    pub fn onto(v: &[c64]) -> Result<Self> {
        let rho = DensityOperator::pure(v)?;
        Ok(Projector {
            op: rho.op,
            rank: 1,
        })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn complement(&self) -> Self {
        let op = HermitianOperator::identity(self.dim())
            .lin_comb(1.0, &self.op, -1.0)
            .expect("same dimension");
        Projector {
            op,
            rank: self.dim() - self.rank,
        }
    }

    /// Operator order `self ≤ other`, checked as `self·other·self = self`.
    pub fn is_le(&self, other: &Projector, tol: f64) -> bool {
        match other.op.sandwich(&self.op) {
            Ok(s) => s.max_abs_diff(&self.op) <= tol,
            Err(_) => false,
        }
    }
}

impl AsRef<HermitianOperator> for Projector {
    fn as_ref(&self) -> &HermitianOperator {
        &self.op
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let m = Mat::from_fn(2, 2, |i, j| c64::new(if i < j { 1.0 } else { 0.0 }, 0.0));
        assert!(matches!(
            HermitianOperator::from_mat(m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn density_validation() {
        let bad = HermitianOperator::diagonal(&[1.2, -0.2]).unwrap();
        assert!(matches!(DensityOperator::new(bad), Err(Error::NotPsd(_))));
        let tiny_negative = HermitianOperator::diagonal(&[1.0 + 5e-11, -5e-11]).unwrap();
        assert!(DensityOperator::new(tiny_negative).is_ok());
        let trace = HermitianOperator::diagonal(&[0.5, 0.4]).unwrap();
        assert!(matches!(DensityOperator::new(trace), Err(Error::Trace(_))));
    }

    #[test]
    fn projector_validation() {
        let half = HermitianOperator::diagonal(&[0.5, 0.0]).unwrap();
        assert!(Projector::new(half).is_err());
        let p = Projector::new(HermitianOperator::diagonal(&[1.0, 0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(p.complement().rank(), 1);
    }
}
