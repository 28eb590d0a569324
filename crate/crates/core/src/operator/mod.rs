//! Dense finite-dimensional Hermitian operator algebra.

mod algebra;
pub mod csv;
mod hermitian;
mod mainest;
mod spectral;

pub use algebra::{
    expectation, join_projectors, meet_commuting, partial_trace, partial_trace_state, projector_mass,
    support_projector, tensor_power, tensor_power_within, tensor_product, tensor_product_within, Keep,
};
pub(crate) use algebra::checked_pow;
pub(crate) use hermitian::check_dims;
pub use hermitian::{
    DensityOperator, HermitianOperator, Projector, HERMITIAN_TOL, PROJECTOR_TOL, PSD_TOL, TRACE_TOL,
};
pub use mainest::{lemma_mainest_check, MainEstReport};
pub use spectral::{hermitian_eig, Eigen, SpectralDecomposition};

pub use faer::c64;

/// Largest matrix dimension materialized by default.
pub const DEFAULT_DIM_GUARD: usize = 4096;

/// Relative tolerance for merging (near-)degenerate eigenvalues.
pub const DEFAULT_GROUPING_TOL: f64 = 1e-9;
