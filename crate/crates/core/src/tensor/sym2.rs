use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::TensorError;

/// Symmetric `(0,2)`-tensor value, stored densely with symmetry enforced on write.
#[derive(Clone, Debug, PartialEq)]
pub struct Sym2 {
    n: usize,
    data: Vec<f64>,
}

impl Sym2 {
    pub fn zeros(n: usize) -> Self {
        Sym2 {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Diagonal `(−1, 1, …, 1)`.
    pub fn minkowski(n: usize) -> Self {
        let mut g = Sym2::zeros(n);
        g.set(0, 0, -1.0);
        for i in 1..n {
            g.set(i, i, 1.0);
        }
        g
    }

    /// Builds from `f(i, j)` evaluated on the lower triangle `i ≥ j`.
    pub fn from_lower<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut g = Sym2::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                g.set(i, j, f(i, j));
            }
        }
        g
    }

    /// Rejects row data that is not exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, TensorError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(TensorError::NotSquare);
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(TensorError::NotSymmetric { i, j });
                }
            }
        }
        Ok(Sym2::from_lower(n, |i, j| rows[i][j]))
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        Sym2::from_lower(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `g·x`, i.e. the covector `x♭`.
    pub fn lower(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let gx = self.lower(x);
        gx.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    /// `x♭ ⊗ x♭`.
    pub fn outer_flat(&self, x: &[f64]) -> Sym2 {
        let f = self.lower(x);
        Sym2::from_lower(self.n, |i, j| f[i] * f[j])
    }

    pub fn outer(v: &[f64]) -> Sym2 {
        Sym2::from_lower(v.len(), |i, j| v[i] * v[j])
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.to_matrix())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

/// Relative eigenvalue floor below which a metric value counts as degenerate.
pub const SIGNATURE_TOL: f64 = 1e-10;

/// A [`Sym2`] certified to have signature `(−, +, …, +)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LorentzSym2 {
    g: Sym2,
    eigenvalues: Vec<f64>,
}

impl LorentzSym2 {
    pub fn new(g: Sym2) -> Result<Self, TensorError> {
        let eigenvalues = g.eigenvalues();
        let largest = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let smallest = eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        let negatives = eigenvalues.iter().filter(|&&v| v < 0.0).count();
        if !(largest > 0.0) || smallest <= SIGNATURE_TOL * largest || negatives != 1 {
            return Err(TensorError::NotLorentzian {
                negative: negatives,
                eigenvalues,
            });
        }
        Ok(LorentzSym2 { g, eigenvalues })
    }

    pub fn minkowski(n: usize) -> Self {
        LorentzSym2::new(Sym2::minkowski(n)).expect("Minkowski metric is Lorentzian")
    }

    pub fn sym(&self) -> &Sym2 {
        &self.g
    }

    pub fn n(&self) -> usize {
        self.g.n
    }

    /// Ascending; exactly the first one is negative.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.g
            .to_matrix()
            .try_inverse()
            .expect("Lorentzian metric is invertible")
    }

    /// A `g`-orthonormal frame; `frame[0]` is timelike with `g(e0, e0) = −1`.
    pub fn orthonormal_frame(&self) -> Vec<Vec<f64>> {
        let eig = SymmetricEigen::new(self.g.to_matrix());
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        order
            .into_iter()
            .map(|k| {
                let s = eig.eigenvalues[k].abs().sqrt();
                eig.eigenvectors.column(k).iter().map(|v| v / s).collect()
            })
            .collect()
    }

    pub fn classify(&self, x: &[f64]) -> CausalCharacter {
        CausalCharacter::classify(&self.g, x)
    }
}

impl std::ops::Deref for LorentzSym2 {
    type Target = Sym2;
    fn deref(&self) -> &Sym2 {
        &self.g
    }
}

/// Relative width of the band in which `g(X, X)` counts as zero.
pub const NULL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalCharacter {
    Timelike,
    Null,
    Spacelike,
}

impl CausalCharacter {
    /// Null when `|g(X,X)| ≤ 1e−9 · ‖g‖ · ‖X‖²` (max norms).
    pub fn classify(g: &Sym2, x: &[f64]) -> Self {
        let q = g.inner(x, x);
        let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if q.abs() <= NULL_TOL * g.max_norm() * xn * xn {
            CausalCharacter::Null
        } else if q < 0.0 {
            CausalCharacter::Timelike
        } else {
            CausalCharacter::Spacelike
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CausalCharacter::Timelike => "timelike",
            CausalCharacter::Null => "null",
            CausalCharacter::Spacelike => "spacelike",
        }
    }
}

impl fmt::Display for CausalCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
