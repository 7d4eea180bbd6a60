//! Fiberwise linear algebra behind the codimension count: the linear part of
//! `α_r` on one fiber with its explicit right inverse, the curvature-to-form
//! maps `c`, codimension formulas, the threshold inequality and jet-fiber
//! dimensions.
//!
//! Coordinates put the direction `X` along the first basis vector (index 0).

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::expr::binomial;
use crate::geometry::TangentVector;
use crate::linalg::{null_quotient_basis, numerical_rank, orthogonal_complement};
use crate::rng::SampleRng;
use crate::tensor::{
    curv_coordinates, curv_space_basis, curv_space_dim, CausalCharacter, CurvTensor,
    LorentzSym2, Sym2, SymPairLayout, SymPairTensor,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FiberError {
    #[error("dimension n = {n} not supported here (need {min} <= n <= {max})")]
    Dimension { n: usize, min: usize, max: usize },
    #[error("order r = {r} not supported here (need {min} <= r <= {max})")]
    Order { r: usize, min: usize, max: usize },
    #[error("tensor dimension {got} does not match n = {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("curvature symmetry residual {residual:e} too large")]
    SymmetryViolation { residual: f64 },
}

/// Relative tolerance for the right-inverse identity.
pub const RIGHT_INVERSE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiberClass {
    NonNull,
    Null,
}

impl FiberClass {
    pub fn of(c: CausalCharacter) -> Self {
        match c {
            CausalCharacter::Null => FiberClass::Null,
            _ => FiberClass::NonNull,
        }
    }
}

/// `P_abcd = ½(Q_{ad|bc0…0} + Q_{bc|ad0…0} − Q_{ac|bd0…0} − Q_{bd|ac0…0})` with
/// `r − 1` copies of the direction index 0 in each trailing group.
pub fn alpha_fiber_apply(q: &SymPairTensor) -> CurvTensor {
    let layout = q.layout();
    let n = layout.n();
    let r = layout.r();
    let mut group = vec![0usize; r + 1];
    let mut entry = |p: usize, s: usize, c: usize, d: usize| {
        group[0] = c;
        group[1] = d;
        q.get(p, s, &group)
    };
    let mut data = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    data[((a * n + b) * n + c) * n + d] = 0.5
                        * (entry(a, d, b, c) + entry(b, c, a, d) - entry(a, c, b, d) - entry(b, d, a, c));
                }
            }
        }
    }
    CurvTensor::from_computed(n, data)
}

fn check_n(n: usize, min: usize, max: usize) -> Result<(), FiberError> {
    if n < min || n > max {
        Err(FiberError::Dimension { n, min, max })
    } else {
        Ok(())
    }
}

fn check_r(r: usize) -> Result<(), FiberError> {
    if r == 0 {
        Err(FiberError::Order { r, min: 1, max: usize::MAX })
    } else {
        Ok(())
    }
}

/// Matrix of `Q ↦ α(Q)` from the canonical `S₂ ⊗ S_{r+1}` basis (columns) to
/// coordinates in [`curv_space_basis`] (rows).
pub fn alpha_fiber_matrix(n: usize, r: usize) -> Result<DMatrix<f64>, FiberError> {
    check_n(n, 2, 8)?;
    check_r(r)?;
    let layout = Arc::new(SymPairLayout::new(n, r));
    let basis = curv_space_basis(n);
    let cols = layout.dim();
    let mut m = DMatrix::zeros(basis.len(), cols);
    let mut q = SymPairTensor::zeros(layout.clone());
    for j in 0..cols {
        let ((a, b), set) = layout.decompose(j);
        let group: Vec<usize> = set.iter().map(|&v| v as usize).collect();
        q.set(a, b, &group, 1.0);
        // only groups holding r − 1 zeros reach α; skip the rest quickly
        if group.iter().filter(|&&g| g == 0).count() + 1 >= r {
            let p = alpha_fiber_apply(&q);
            for (i, bt) in basis.iter().enumerate() {
                m[(i, j)] = bt.dot(&p);
            }
        }
        q.set(a, b, &group, 0.0);
    }
    Ok(m)
}

/// `Q_{ab|cd0…0} = −(1/3)(P_acbd + P_adbc)` on groups containing at least
/// `r − 1` zeros (the copies are removed to leave `{c, d}`); zero elsewhere.
/// Satisfies `α(Q(P)) = P`.
pub fn right_inverse(p: &CurvTensor, n: usize, r: usize) -> Result<SymPairTensor, FiberError> {
    check_r(r)?;
    if p.n() != n {
        return Err(FiberError::DimensionMismatch {
            expected: n,
            got: p.n(),
        });
    }
    let residual = p.residual();
    if residual > 1e-10 {
        return Err(FiberError::SymmetryViolation { residual });
    }
    let layout = Arc::new(SymPairLayout::new(n, r));
    let mut values = vec![0.0; layout.dim()];
    for (j, v) in values.iter_mut().enumerate() {
        let ((a, b), set) = layout.decompose(j);
        let zeros = set.iter().filter(|&&g| g == 0).count();
        if zeros + 1 < r {
            continue;
        }
        // sorted multiset: drop r − 1 leading zeros
        let c = set[r - 1] as usize;
        let d = set[r] as usize;
        *v = -(p.get(a, c, b, d) + p.get(a, d, b, c)) / 3.0;
    }
    Ok(SymPairTensor::from_values(layout, values))
}

/// Matrix of `R ↦ (R(A_i, X, A_j, X))_{i ≤ j}` over [`curv_space_basis`], with
/// `{A_i}` a basis of `X⊥` (non-null) or of `X⊥ / ⟨X⟩` (null).
pub fn c_map_matrix(g: &Sym2, x: &[f64], class: FiberClass) -> DMatrix<f64> {
    let n = g.n();
    let a = match class {
        FiberClass::NonNull => orthogonal_complement(g, x),
        FiberClass::Null => null_quotient_basis(g, x),
    };
    let pairs: Vec<(usize, usize)> = (0..a.len())
        .flat_map(|i| (i..a.len()).map(move |j| (i, j)))
        .collect();
    let basis = curv_space_basis(n);
    DMatrix::from_fn(pairs.len(), basis.len(), |row, col| {
        let (i, j) = pairs[row];
        basis[col].eval(&a[i], x, &a[j], x)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberMapReport {
    pub n: usize,
    pub r: usize,
    pub class: FiberClass,
    pub vector: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub expected_rank: usize,
    /// `r · rank`, plus one for the null class.
    pub codim_computed: usize,
    pub codim_expected: usize,
    pub singular_values: Vec<f64>,
    pub ok: bool,
}

/// Rank of the map `c` at `(g, X)` and the codimension it implies for order `r`.
pub fn c_map_rank(g: &LorentzSym2, x: &TangentVector, r: usize) -> Result<FiberMapReport, FiberError> {
    check_r(r)?;
    let n = g.n();
    if x.components().len() != n {
        return Err(FiberError::DimensionMismatch {
            expected: n,
            got: x.components().len(),
        });
    }
    let class = FiberClass::of(CausalCharacter::classify(g, x.components()));
    let m = c_map_matrix(g, x.components(), class);
    let (rank, singular_values) = numerical_rank(&m);
    let expected_rank = match class {
        FiberClass::NonNull => n * (n - 1) / 2,
        FiberClass::Null => (n - 1) * (n - 2) / 2,
    };
    let codim_computed = r * rank + usize::from(class == FiberClass::Null);
    let codim_expected = codim_nongen(n, r, class);
    Ok(FiberMapReport {
        n,
        r,
        class,
        vector: x.components().to_vec(),
        rows: m.nrows(),
        cols: m.ncols(),
        rank,
        expected_rank,
        codim_computed,
        codim_expected,
        singular_values,
        ok: rank == expected_rank && codim_computed == codim_expected,
    })
}

/// `r n(n−1)/2` (non-null) or `r (n−1)(n−2)/2 + 1` (null).
pub fn codim_nongen(n: usize, r: usize, class: FiberClass) -> usize {
    match class {
        FiberClass::NonNull => r * n * (n - 1) / 2,
        FiberClass::Null => r * (n - 1) * (n - 2) / 2 + 1,
    }
}

/// Smallest integer `r` with `r > (4n − 2)/((n − 1)(n − 2))`.
pub fn r_threshold(n: usize) -> Result<usize, FiberError> {
    if n < 3 {
        return Err(FiberError::Dimension { n, min: 3, max: usize::MAX });
    }
    Ok((4 * n - 2) / ((n - 1) * (n - 2)) + 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimCheck {
    pub n: usize,
    pub r: usize,
    /// `dim T̊M = 2n`.
    pub dim: usize,
    pub codim_non_null: usize,
    pub codim_null: usize,
    pub pass_non_null: bool,
    pub pass_null: bool,
    pub pass: bool,
    pub threshold: usize,
    /// `r ≥ threshold` implies `pass`.
    pub consistent_with_threshold: bool,
}

/// Compares `2n` with both codimensions at order `r`.
pub fn dim_check(n: usize, r: usize) -> Result<DimCheck, FiberError> {
    let threshold = r_threshold(n)?;
    check_r(r)?;
    let dim = 2 * n;
    let codim_non_null = codim_nongen(n, r, FiberClass::NonNull);
    let codim_null = codim_nongen(n, r, FiberClass::Null);
    let pass_non_null = dim < codim_non_null;
    let pass_null = dim < codim_null;
    let pass = pass_non_null && pass_null;
    Ok(DimCheck {
        n,
        r,
        dim,
        codim_non_null,
        codim_null,
        pass_non_null,
        pass_null,
        pass,
        threshold,
        consistent_with_threshold: r < threshold || pass,
    })
}

/// `n(n+1)/2 · Σ_{j=0}^{k} C(n+j−1, j)`: metric components times Taylor coefficients.
pub fn jet_fiber_dim(n: usize, k: usize) -> usize {
    let coeffs: usize = (0..=k).map(|j| binomial(n + j - 1, j)).sum();
    n * (n + 1) / 2 * coeffs
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurjectivityReport {
    pub n: usize,
    pub r: usize,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub expected_rank: usize,
    pub trials: usize,
    /// Worst `‖α(Q(P)) − P‖ / ‖P‖` (max norms) over the trials.
    pub max_right_inverse_error: f64,
    pub ok: bool,
}

/// Rank of `α` on the fiber and the right-inverse identity on every basis
/// element plus `random_trials` random combinations drawn from `seed`.
pub fn verify_surjectivity(n: usize, r: usize, random_trials: usize, seed: u64) -> Result<SurjectivityReport, FiberError> {
    let m = alpha_fiber_matrix(n, r)?;
    let (rank, _) = numerical_rank(&m);
    let basis = curv_space_basis(n);
    let mut worst = 0.0f64;
    let mut check = |p: &CurvTensor| -> Result<(), FiberError> {
        let q = right_inverse(p, n, r)?;
        let back = alpha_fiber_apply(&q);
        let err = back
            .as_slice()
            .iter()
            .zip(p.as_slice())
            .fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
        worst = worst.max(err / p.max_norm());
        // the same identity through the matrix
        let coords = curv_coordinates(p);
        let image = &m * nalgebra::DVector::from_column_slice(q.values());
        let merr = image
            .iter()
            .zip(&coords)
            .fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
        let cn = coords.iter().fold(0.0f64, |e, v| e.max(v.abs()));
        worst = worst.max(merr / cn);
        Ok(())
    };
    for b in basis.iter() {
        check(b)?;
    }
    let mut rng = SampleRng::new(seed);
    for _ in 0..random_trials {
        let c = rng.normal_vec(basis.len());
        check(&CurvTensor::combination(&basis, &c))?;
    }
    let expected_rank = curv_space_dim(n);
    Ok(SurjectivityReport {
        n,
        r,
        rows: m.nrows(),
        cols: m.ncols(),
        rank,
        expected_rank,
        trials: basis.len() + random_trials,
        max_right_inverse_error: worst,
        ok: rank == expected_rank && worst <= RIGHT_INVERSE_TOL,
    })
}
