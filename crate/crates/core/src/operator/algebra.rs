use faer::{c64, Mat};

use super::hermitian::{check_dims, DensityOperator, HermitianOperator, Projector, PSD_TOL};
use super::spectral::Eigen;
use super::DEFAULT_DIM_GUARD;
use crate::{Error, Result};

fn guard(dim: u128, max_dim: usize) -> Result<()> {
    if dim > max_dim as u128 {
        Err(Error::DimensionGuard {
            dim,
            guard: max_dim,
        })
    } else {
        Ok(())
    }
}

/// `d^n` without overflow, saturating at `u128::MAX`.
pub(crate) fn checked_pow(d: usize, n: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..n {
        acc = acc.saturating_mul(d as u128);
    }
    acc
}

/// Kronecker product `A ⊗ B` under the default dimension guard.
pub fn tensor_product(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    tensor_product_within(a, b, DEFAULT_DIM_GUARD)
}

pub fn tensor_product_within(
    a: &HermitianOperator,
    b: &HermitianOperator,
    max_dim: usize,
) -> Result<HermitianOperator> {
    guard(a.dim() as u128 * b.dim() as u128, max_dim)?;
    let (da, db) = (a.dim(), b.dim());
    let (am, bm) = (a.as_mat(), b.as_mat());
    let mat = Mat::from_fn(da * db, da * db, |i, j| {
        am[(i / db, j / db)] * bm[(i % db, j % db)]
    });
    Ok(HermitianOperator::symmetrized(mat))
}

/// `ρ^{⊗n}`; `n = 0` gives the 1×1 operator `[1]`.
pub fn tensor_power(rho: &DensityOperator, n: usize) -> Result<DensityOperator> {
    tensor_power_within(rho, n, DEFAULT_DIM_GUARD)
}

pub fn tensor_power_within(rho: &DensityOperator, n: usize, max_dim: usize) -> Result<DensityOperator> {
    guard(checked_pow(rho.dim(), n), max_dim)?;
    let mut acc = HermitianOperator::identity(1);
    for _ in 0..n {
        acc = tensor_product_within(&acc, rho.op(), max_dim)?;
    }
    Ok(DensityOperator::new_unchecked(acc))
}

/// Which factor of `H_left ⊗ H_right` to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    Left,
    Right,
}

/// Partial trace of an operator on `C^{d_left} ⊗ C^{d_right}`.
pub fn partial_trace(
    op: &HermitianOperator,
    d_left: usize,
    d_right: usize,
    keep: Keep,
) -> Result<HermitianOperator> {
    if d_left * d_right != op.dim() {
        return Err(Error::DimensionMismatch(op.dim(), d_left * d_right));
    }
    let m = op.as_mat();
    let mat = match keep {
        Keep::Left => Mat::from_fn(d_left, d_left, |i, j| {
            let mut s = c64::new(0.0, 0.0);
            for k in 0..d_right {
                s += m[(i * d_right + k, j * d_right + k)];
            }
            s
        }),
        Keep::Right => Mat::from_fn(d_right, d_right, |i, j| {
            let mut s = c64::new(0.0, 0.0);
            for k in 0..d_left {
                s += m[(k * d_right + i, k * d_right + j)];
            }
            s
        }),
    };
    Ok(HermitianOperator::symmetrized(mat))
}

pub fn partial_trace_state(
    rho: &DensityOperator,
    d_left: usize,
    d_right: usize,
    keep: Keep,
) -> Result<DensityOperator> {
    partial_trace(rho.op(), d_left, d_right, keep).map(DensityOperator::new_unchecked)
}

/// Smallest projector `p` with `pHp = H`: the span of eigenvectors with
/// eigenvalue above `tol`. Eigenvalues below `−tol` are rejected.
pub fn support_projector(h: &HermitianOperator, tol: f64) -> Result<Projector> {
    let eig = Eigen::of(h)?;
    support_of_eigen(&eig, tol)
}

pub(crate) fn support_of_eigen(eig: &Eigen, tol: f64) -> Result<Projector> {
    if let Some(&min) = eig.values().last() {
        if min < -tol.max(PSD_TOL) {
            return Err(Error::NotPsd(min));
        }
    }
    Ok(eig.projector_where(|l| l > tol))
}

/// Tolerance for reading the support of a sum of projectors.
const JOIN_TOL: f64 = 1e-9;

/// Lattice join `⋁ p_i`: the projector onto the span of all ranges.
pub fn join_projectors(ps: &[Projector]) -> Result<Projector> {
    let first = ps
        .first()
        .ok_or_else(|| Error::invalid("join of an empty family"))?;
    let mut sum = HermitianOperator::zero(first.dim());
    for p in ps {
        check_dims(first.dim(), p.dim())?;
        sum = sum.lin_comb(1.0, p.op(), 1.0)?;
    }
    support_projector(&sum, JOIN_TOL)
}

/// Lattice meet of two commuting projectors (their product).
pub fn meet_commuting(p: &Projector, q: &Projector) -> Result<Projector> {
    check_dims(p.dim(), q.dim())?;
    let prod = HermitianOperator::symmetrized(p.op().product(q.op()));
    let rank = prod.trace().round() as usize;
    Ok(Projector::from_parts(prod, rank))
}

/// `Tr(D X)`.
pub fn expectation(rho: &DensityOperator, x: &HermitianOperator) -> Result<f64> {
    check_dims(rho.dim(), x.dim())?;
    let (a, b) = (rho.op().as_mat(), x.as_mat());
    let d = rho.dim();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    Ok(s)
}

/// `Tr(D p)` for a projector, clamped to `[0, 1]`.
pub fn projector_mass(rho: &DensityOperator, p: &Projector) -> Result<f64> {
    let m = expectation(rho, p.op())?;
    debug_assert!((-1e-9..=1.0 + 1e-9).contains(&m), "projector mass {m}");
    Ok(m.clamp(0.0, 1.0))
}
