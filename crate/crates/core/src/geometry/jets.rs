use std::sync::Arc;

use nalgebra::DMatrix;

use super::{GeometryError, MetricJet};
use crate::expr::JetLayout;
use crate::tensor::CurvTensor;

/// Jet of a tensor field with `rank` covariant-style slots over `n` coordinates.
///
/// Component `(a₁, …, a_m)` has flat index `((a₁·n + a₂)·n + …)·n + a_m`; its
/// Taylor coefficients occupy one contiguous block in the shared layout.
#[derive(Clone, Debug)]
pub struct TensorJet {
    n: usize,
    rank: usize,
    point: Arc<[f64]>,
    layout: Arc<JetLayout>,
    data: Vec<f64>,
}

impl TensorJet {
    pub fn zeros(n: usize, rank: usize, point: Arc<[f64]>, order: usize) -> Self {
        let layout = JetLayout::get(n, order);
        let data = vec![0.0; n.pow(rank as u32) * layout.len()];
        TensorJet {
            n,
            rank,
            point,
            layout,
            data,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.layout.order()
    }

    pub fn point(&self) -> &Arc<[f64]> {
        &self.point
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn component_count(&self) -> usize {
        self.n.pow(self.rank as u32)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn coeffs(&self, comp: usize) -> &[f64] {
        let l = self.layout.len();
        &self.data[comp * l..(comp + 1) * l]
    }

    pub fn coeffs_mut(&mut self, comp: usize) -> &mut [f64] {
        let l = self.layout.len();
        &mut self.data[comp * l..(comp + 1) * l]
    }

    pub fn value(&self, idx: &[usize]) -> f64 {
        self.coeffs(self.flat_index(idx))[0]
    }

    /// Base-point values of all components in flat order.
    pub fn values(&self) -> Vec<f64> {
        let l = self.layout.len();
        self.data.iter().step_by(l).copied().collect()
    }

    pub fn truncate(&self, order: usize) -> TensorJet {
        assert!(order <= self.order());
        let layout = JetLayout::get(self.n, order);
        let l_old = self.layout.len();
        let l_new = layout.len();
        let mut data = Vec::with_capacity(self.component_count() * l_new);
        for c in 0..self.component_count() {
            data.extend_from_slice(&self.data[c * l_old..c * l_old + l_new]);
        }
        TensorJet {
            n: self.n,
            rank: self.rank,
            point: self.point.clone(),
            layout,
            data,
        }
    }

    /// Largest absolute coefficient over all components and orders.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Jet of `g^{ab}` to the order of `mj`, by the order-by-order recursion
/// `G⁻¹[α] = −G(p)⁻¹ Σ_{0<β≤α} G[β] G⁻¹[α−β]`.
pub fn inverse_metric_jet(mj: &MetricJet) -> TensorJet {
    let n = mj.n();
    let g = mj.as_tensor_jet();
    let layout = g.layout.clone();
    let mut out = TensorJet::zeros(n, 2, mj.point().clone(), mj.order());
    let g0inv = mj.base().inverse();
    let l = layout.len();
    let coeff = |t: &TensorJet, a: usize, b: usize, k: usize| t.data[(a * n + b) * l + k];
    for a in 0..n {
        for b in 0..n {
            out.data[(a * n + b) * l] = g0inv[(a, b)];
        }
    }
    let mut s = DMatrix::<f64>::zeros(n, n);
    for alpha in 1..l {
        s.fill(0.0);
        for &(beta, gamma) in layout.product_pairs(alpha) {
            let (beta, gamma) = (beta as usize, gamma as usize);
            if beta == 0 {
                continue;
            }
            for a in 0..n {
                for c in 0..n {
                    let gab = coeff(&g, a, c, beta);
                    if gab == 0.0 {
                        continue;
                    }
                    for b in 0..n {
                        s[(a, b)] += gab * coeff(&out, c, b, gamma);
                    }
                }
            }
        }
        let v = -(&g0inv * &s);
        for a in 0..n {
            for b in 0..n {
                out.data[(a * n + b) * l + alpha] = v[(a, b)];
            }
        }
    }
    out
}

/// `Γ_{d,bc} = ½(∂_b g_dc + ∂_c g_db − ∂_d g_bc)` as a rank-3 jet indexed
/// `(d, b, c)`, one order below `mj`.
pub fn christoffel_first_kind_jet(mj: &MetricJet) -> Result<TensorJet, GeometryError> {
    mj.require_order(1)?;
    let n = mj.n();
    let layout = JetLayout::get(n, mj.order());
    // dg[(i*n + j)*n + e] = ∂_e g_ij
    let mut dg: Vec<Vec<f64>> = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            let c = mj.component(i, j).coeffs();
            for e in 0..n {
                dg.push(layout.partial(c, e));
            }
        }
    }
    let d = |i: usize, j: usize, e: usize| &dg[(i * n + j) * n + e];
    let mut out = TensorJet::zeros(n, 3, mj.point().clone(), mj.order() - 1);
    for dd in 0..n {
        for b in 0..n {
            for c in 0..n {
                let (x, y, z) = (d(dd, c, b), d(dd, b, c), d(b, c, dd));
                let slot = out.coeffs_mut((dd * n + b) * n + c);
                for k in 0..slot.len() {
                    slot[k] = 0.5 * (x[k] + y[k] - z[k]);
                }
            }
        }
    }
    Ok(out)
}

fn raise_first(ginv: &TensorJet, lowered: &TensorJet) -> TensorJet {
    let n = lowered.n;
    let mut out = TensorJet::zeros(n, 3, lowered.point.clone(), lowered.order());
    let layout = out.layout.clone();
    let l = layout.len();
    for a in 0..n {
        for bc in 0..n * n {
            let comp = a * n * n + bc;
            let slot = &mut out.data[comp * l..(comp + 1) * l];
            for d in 0..n {
                layout.mul_acc(slot, ginv.coeffs(a * n + d), lowered.coeffs(d * n * n + bc), 1.0);
            }
        }
    }
    out
}

/// `Γ^a_bc = g^{ad} Γ_{d,bc}` as a rank-3 jet indexed `(a, b, c)`, one order
/// below `mj`. Symmetric in `b, c` exactly.
pub fn christoffel_jet(mj: &MetricJet) -> Result<TensorJet, GeometryError> {
    let lowered = christoffel_first_kind_jet(mj)?;
    let ginv = inverse_metric_jet(&mj.truncate(mj.order() - 1));
    Ok(raise_first(&ginv, &lowered))
}

/// The Riemann tensor field as a rank-4 jet of order `k − 2`:
///
/// `R_abcd = ½(g_ad,bc + g_bc,ad − g_ac,bd − g_bd,ac) + Σ_p (Γ_{p,bc} Γ^p_ad − Γ_{p,bd} Γ^p_ac)`.
///
/// This coordinate formula fixes the sign convention; for constant sectional
/// curvature `K` it gives `R = (K/2) g ∧○ g`.
pub fn riemann_jet(mj: &MetricJet) -> Result<TensorJet, GeometryError> {
    mj.require_order(2)?;
    let n = mj.n();
    let k = mj.order();
    let lay_k = JetLayout::get(n, k);
    let lay_1 = JetLayout::get(n, k - 1);
    let lowered = christoffel_first_kind_jet(mj)?;
    let gamma = raise_first(&inverse_metric_jet(&mj.truncate(k - 1)), &lowered);

    // ddg[((i*n + j)*n + e)*n + f] = ∂_e ∂_f g_ij, order k − 2
    let mut ddg: Vec<Vec<f64>> = Vec::with_capacity(n.pow(4));
    for i in 0..n {
        for j in 0..n {
            let c = mj.component(i, j).coeffs();
            for e in 0..n {
                let first = lay_k.partial(c, e);
                for f in 0..n {
                    ddg.push(lay_1.partial(&first, f));
                }
            }
        }
    }
    let dd = |i: usize, j: usize, e: usize, f: usize| &ddg[((i * n + j) * n + e) * n + f];

    let mut out = TensorJet::zeros(n, 4, mj.point().clone(), k - 2);
    let layout = out.layout.clone();
    let l = layout.len();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let comp = ((a * n + b) * n + c) * n + d;
                    let slot = &mut out.data[comp * l..(comp + 1) * l];
                    let (t1, t2, t3, t4) = (dd(a, d, b, c), dd(b, c, a, d), dd(a, c, b, d), dd(b, d, a, c));
                    for q in 0..l {
                        slot[q] = 0.5 * (t1[q] + t2[q] - t3[q] - t4[q]);
                    }
                    for p in 0..n {
                        layout.mul_acc(
                            slot,
                            lowered.coeffs((p * n + b) * n + c),
                            gamma.coeffs((p * n + a) * n + d),
                            1.0,
                        );
                        layout.mul_acc(
                            slot,
                            lowered.coeffs((p * n + b) * n + d),
                            gamma.coeffs((p * n + a) * n + c),
                            -1.0,
                        );
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `R(p)` from a metric jet of order ≥ 2.
pub fn riemann_from_jet(mj: &MetricJet) -> Result<CurvTensor, GeometryError> {
    mj.require_order(2)?;
    let r = riemann_jet(&mj.truncate(2))?;
    Ok(CurvTensor::from_computed(mj.n(), r.values()))
}

/// `(∇T)_{a₁…a_m e} = ∂_e T_{a₁…a_m} − Σ_i Γ^f_{e a_i} T_{a₁…f…a_m}`, with the new
/// slot appended last. The result has order one below `t`.
pub fn covariant_derivative_jet(t: &TensorJet, gamma: &TensorJet) -> Result<TensorJet, GeometryError> {
    if t.order() == 0 {
        return Err(GeometryError::InsufficientOrder { needed: 1, got: 0 });
    }
    if gamma.order() + 1 < t.order() {
        return Err(GeometryError::InsufficientOrder {
            needed: t.order() - 1,
            got: gamma.order(),
        });
    }
    if gamma.rank != 3 || gamma.n != t.n {
        return Err(GeometryError::InvalidArgument(
            "connection jet must be rank 3 in the same dimension".to_string(),
        ));
    }
    let n = t.n;
    let m = t.rank;
    let mut out = TensorJet::zeros(n, m + 1, t.point.clone(), t.order() - 1);
    let layout = out.layout.clone();
    let l = layout.len();
    let mut idx = vec![0usize; m];
    for comp in 0..t.component_count() {
        // decode comp into idx
        let mut rem = comp;
        for s in (0..m).rev() {
            idx[s] = rem % n;
            rem /= n;
        }
        for e in 0..n {
            let oc = comp * n + e;
            let d = t.layout.partial(t.coeffs(comp), e);
            let slot = &mut out.data[oc * l..(oc + 1) * l];
            slot.copy_from_slice(&d);
            for s in 0..m {
                let stride = n.pow((m - 1 - s) as u32);
                let base = comp - idx[s] * stride;
                for f in 0..n {
                    layout.mul_acc(
                        slot,
                        gamma.coeffs((f * n + e) * n + idx[s]),
                        t.coeffs(base + f * stride),
                        -1.0,
                    );
                }
            }
        }
    }
    Ok(out)
}
