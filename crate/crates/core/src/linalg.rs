//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;

use crate::tensor::Sym2;

/// Relative singular-value cutoff used by [`numerical_rank`].
pub const RANK_TOL: f64 = 1e-8;

/// Rank as the number of singular values above `RANK_TOL · σ_max`, together
/// with the singular values in descending order.
pub fn numerical_rank(m: &DMatrix<f64>) -> (usize, Vec<f64>) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (0, Vec::new());
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let top = sv[0];
    if !(top > 0.0) {
        return (0, sv);
    }
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * top).count();
    (rank, sv)
}

fn argmax_abs(v: &[f64], skip: Option<usize>) -> usize {
    let mut best = usize::MAX;
    let mut bv = -1.0;
    for (i, x) in v.iter().enumerate() {
        if Some(i) != skip && x.abs() > bv {
            bv = x.abs();
            best = i;
        }
    }
    best
}

/// Basis of `X⊥ = {A : g(A, X) = 0}` by pivoted elimination on `w = g·X`.
///
/// With pivot `p = argmax |w_j|` the basis is `A_j = e_j − (w_j / w_p) e_p` for
/// `j ≠ p`, in increasing `j`. When `X` is null, `X = Σ_{j≠p} X^j A_j`.
pub fn orthogonal_complement(g: &Sym2, x: &[f64]) -> Vec<Vec<f64>> {
    let n = g.n();
    let w = g.lower(x);
    let p = argmax_abs(&w, None);
    assert!(w[p] != 0.0, "g·X vanishes; X must be nonzero");
    (0..n)
        .filter(|&j| j != p)
        .map(|j| {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            a[p] = -w[j] / w[p];
            a
        })
        .collect()
}

/// Representatives of a basis of `X⊥ / ⟨X⟩` for null `X` (size `n − 2`).
///
/// Starts from [`orthogonal_complement`], drops the element carrying the
/// largest coefficient of `X`, and removes the `X`-direction from the rest by
/// making each representative vanish in that dropped coordinate.
pub fn null_quotient_basis(g: &Sym2, x: &[f64]) -> Vec<Vec<f64>> {
    let n = g.n();
    let w = g.lower(x);
    let p = argmax_abs(&w, None);
    let full = orthogonal_complement(g, x);
    let drop = argmax_abs(x, Some(p));
    let kept: Vec<usize> = (0..n).filter(|&j| j != p).collect();
    kept.iter()
        .zip(full)
        .filter(|(&j, _)| j != drop)
        .map(|(_, mut a)| {
            let c = a[drop] / x[drop];
            for (ai, xi) in a.iter_mut().zip(x) {
                *ai -= c * xi;
            }
            a
        })
        .collect()
}
