use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{audit, Sym2, TensorError};

/// Relative floor below which a tensor is treated as zero.
pub const ZERO_FLOOR: f64 = 1e-300;

/// Tolerance used when accepting external data as a curvature tensor.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[inline]
fn idx(n: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * n + b) * n + c) * n + d
}

/// A `(0,4)`-tensor with the algebraic symmetries of a Riemann tensor,
/// stored as a dense `n⁴` array in slot order `R(x, y, v, w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvTensor {
    n: usize,
    data: Vec<f64>,
}

impl CurvTensor {
    pub fn zeros(n: usize) -> Self {
        CurvTensor {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    /// Accepts `data` only if its symmetry residual is within [`SYMMETRY_TOL`].
    pub fn from_array(n: usize, data: Vec<f64>) -> Result<Self, TensorError> {
        if data.len() != n * n * n * n {
            return Err(TensorError::DimensionMismatch {
                left: n * n * n * n,
                right: data.len(),
            });
        }
        let residual = riemann_symmetry_residual(n, &data);
        if residual > SYMMETRY_TOL {
            return Err(TensorError::SymmetryViolation { residual });
        }
        Ok(CurvTensor { n, data })
    }

    /// Wraps a tensor produced by a computation that preserves the symmetries
    /// in exact arithmetic; the observed residual is recorded in [`audit`].
    pub(crate) fn from_computed(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n * n * n);
        audit::record(riemann_symmetry_residual(n, &data));
        CurvTensor { n, data }
    }

    /// As [`from_computed`](Self::from_computed), with the residual measured
    /// against `max(scale, max |T|)` so that pure round-off is not amplified.
    pub(crate) fn from_computed_scaled(n: usize, data: Vec<f64>, scale: f64) -> Self {
        debug_assert_eq!(data.len(), n * n * n * n);
        let peak = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        audit::record(riemann_symmetry_residual(n, &data) * peak / peak.max(scale).max(ZERO_FLOOR));
        CurvTensor { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[idx(self.n, a, b, c, d)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn residual(&self) -> f64 {
        riemann_symmetry_residual(self.n, &self.data)
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &CurvTensor) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, s: f64) -> CurvTensor {
        CurvTensor {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &CurvTensor, s: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Linear combination `Σ c_i B_i`.
    pub fn combination(basis: &[CurvTensor], coeffs: &[f64]) -> CurvTensor {
        let n = basis[0].n;
        let mut out = CurvTensor::zeros(n);
        for (b, c) in basis.iter().zip(coeffs) {
            out.add_scaled(b, *c);
        }
        out
    }

    /// `R(a, b, c, d)` for vector arguments.
    pub fn eval(&self, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if b[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let base = idx(n, i, j, k, 0);
                    let inner: f64 = (0..n).map(|l| self.data[base + l] * d[l]).sum();
                    s += a[i] * b[j] * c[k] * inner;
                }
            }
        }
        s
    }

    /// `R(·, X, ·, X)` as a symmetric 2-tensor (slots 2 and 4 contracted).
    pub fn contract_vector(&self, x: &[f64]) -> Sym2 {
        let n = self.n;
        Sym2::from_lower(n, |a, b| {
            let mut s = 0.0;
            for e in 0..n {
                for f in 0..n {
                    s += self.get(a, e, b, f) * x[e] * x[f];
                }
            }
            s
        })
    }
}

/// Worst violation of the three defining identities, normalized by `max |T|`.
///
/// Each identity is measured as the distance from `T` to the subspace where it
/// holds: `|T_xyvw + T_yxvw|/2`, `|T_xyvw + T_xywv|/2`, and the cyclic sum
/// `|T_xyvw + T_yvxw + T_vxyw|/3`. The zero tensor has residual 0.
pub fn riemann_symmetry_residual(n: usize, t: &[f64]) -> f64 {
    assert_eq!(t.len(), n * n * n * n, "expected an n^4 array");
    let scale = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale <= ZERO_FLOOR {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            for v in 0..n {
                for w in 0..n {
                    let txyvw = t[idx(n, x, y, v, w)];
                    let a = (txyvw + t[idx(n, y, x, v, w)]).abs() / 2.0;
                    let b = (txyvw + t[idx(n, x, y, w, v)]).abs() / 2.0;
                    let c = (txyvw + t[idx(n, y, v, x, w)] + t[idx(n, v, x, y, w)]).abs() / 3.0;
                    worst = worst.max(a).max(b).max(c);
                }
            }
        }
    }
    worst / scale
}

/// `(h ∧○ k)_{xyuv} = h_xu k_yv + h_yv k_xu − h_xv k_yu − h_yu k_xv`.
pub fn kulkarni_nomizu(h: &Sym2, k: &Sym2) -> Result<CurvTensor, TensorError> {
    if h.n() != k.n() {
        return Err(TensorError::DimensionMismatch {
            left: h.n(),
            right: k.n(),
        });
    }
    let n = h.n();
    let mut data = vec![0.0; n * n * n * n];
    for x in 0..n {
        for y in 0..n {
            for u in 0..n {
                for v in 0..n {
                    // grouped so that both antisymmetries and h ↔ k hold bit-exactly
                    data[idx(n, x, y, u, v)] = (h.get(x, u) * k.get(y, v) - h.get(x, v) * k.get(y, u))
                        + (h.get(y, v) * k.get(x, u) - h.get(y, u) * k.get(x, v));
                }
            }
        }
    }
    Ok(CurvTensor::from_computed(n, data))
}

/// Dimension of the space of algebraic curvature tensors, `n²(n²−1)/12`.
pub fn curv_space_dim(n: usize) -> usize {
    n * n * (n * n - 1) / 12
}

/// Orthogonal projection (Frobenius inner product) onto the curvature-tensor
/// subspace: antisymmetrize both pairs, symmetrize under pair exchange, then
/// remove the totally antisymmetric part.
pub fn project_to_curvature(n: usize, t: &[f64]) -> Vec<f64> {
    assert_eq!(t.len(), n * n * n * n);
    let mut a = vec![0.0; t.len()];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    a[idx(n, i, j, k, l)] = (t[idx(n, i, j, k, l)] - t[idx(n, j, i, k, l)]
                        - t[idx(n, i, j, l, k)]
                        + t[idx(n, j, i, l, k)]
                        + t[idx(n, k, l, i, j)]
                        - t[idx(n, l, k, i, j)]
                        - t[idx(n, k, l, j, i)]
                        + t[idx(n, l, k, j, i)])
                        / 8.0;
                }
            }
        }
    }
    let mut out = vec![0.0; t.len()];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let cyclic = a[idx(n, i, j, k, l)] + a[idx(n, i, k, l, j)] + a[idx(n, i, l, j, k)];
                    out[idx(n, i, j, k, l)] = a[idx(n, i, j, k, l)] - cyclic / 3.0;
                }
            }
        }
    }
    out
}

fn build_basis(n: usize) -> Vec<CurvTensor> {
    let len = n * n * n * n;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut elementary = vec![0.0; len];
    for e in 0..len {
        elementary[e] = 1.0;
        let mut v = project_to_curvature(n, &elementary);
        elementary[e] = 0.0;
        let initial: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if initial < 1e-12 {
            continue;
        }
        // two rounds of Gram–Schmidt
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = b.iter().zip(&v).map(|(p, q)| p * q).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 * initial {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
        .into_iter()
        .map(|v| CurvTensor::from_computed(n, v))
        .collect()
}

/// Frobenius-orthonormal basis of the curvature-tensor space, obtained by
/// projecting elementary tensors and keeping a maximal independent subset.
pub fn curv_space_basis(n: usize) -> Arc<Vec<CurvTensor>> {
    assert!(n >= 2, "curvature tensors need n >= 2");
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<CurvTensor>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("basis cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(build_basis(n)))
        .clone()
}

/// Coordinates of `r` in [`curv_space_basis`].
pub fn curv_coordinates(r: &CurvTensor) -> Vec<f64> {
    curv_space_basis(r.n()).iter().map(|b| b.dot(r)).collect()
}
