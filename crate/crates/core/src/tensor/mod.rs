//! Tensor values at a single point: symmetric 2-tensors, Lorentzian metric
//! values, algebraic curvature tensors and the symmetric-pair jet spaces.

mod curv;
mod sym2;
mod sympair;

use thiserror::Error;

pub use curv::{
    curv_coordinates, curv_space_basis, curv_space_dim, kulkarni_nomizu, project_to_curvature,
    riemann_symmetry_residual, CurvTensor, SYMMETRY_TOL, ZERO_FLOOR,
};
pub use sym2::{CausalCharacter, LorentzSym2, Sym2, NULL_TOL, SIGNATURE_TOL};
pub use sympair::{SymPairLayout, SymPairTensor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("metric is not Lorentzian: {negative} negative eigenvalues, spectrum {eigenvalues:?}")]
    NotLorentzian { negative: usize, eigenvalues: Vec<f64> },
    #[error("curvature symmetry residual {residual:e} exceeds tolerance")]
    SymmetryViolation { residual: f64 },
}

/// Largest symmetry residual observed on internally computed curvature tensors.
pub mod audit {
    use std::sync::atomic::{AtomicU64, Ordering};

    static MAX_RESIDUAL: AtomicU64 = AtomicU64::new(0);
    static COUNT: AtomicU64 = AtomicU64::new(0);

    // non-negative floats order like their bit patterns
    pub(crate) fn record(residual: f64) {
        MAX_RESIDUAL.fetch_max(residual.to_bits(), Ordering::Relaxed);
        COUNT.fetch_add(1, Ordering::Relaxed);
    }

    /// Number of tensors recorded.
    pub fn count() -> u64 {
        COUNT.load(Ordering::Relaxed)
    }

    /// Max residual since start-up or the last [`reset`].
    pub fn max_residual() -> f64 {
        f64::from_bits(MAX_RESIDUAL.load(Ordering::Relaxed))
    }

    pub fn reset() {
        MAX_RESIDUAL.store(0, Ordering::Relaxed);
        COUNT.store(0, Ordering::Relaxed);
    }
}
