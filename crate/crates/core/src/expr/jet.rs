//! Truncated multivariate Taylor expansions.
//!
//! A [`TaylorJet`] of order `k` in `n` variables stores, for every multi-index
//! `α` with `|α| ≤ k`, the Taylor coefficient `∂^α f(p) / α!`. Coefficients are
//! laid out in graded-lexicographic order: all multi-indices of total degree 0,
//! then degree 1, and so on; within one degree the exponent tuples are sorted in
//! decreasing lexicographic order, so for `n = 2`, degree 2 reads
//! `(2,0), (1,1), (0,2)`. Every module addresses coefficients through this
//! order, which has one useful consequence: the layout of order `k` is a prefix
//! of the layout of order `k + 1`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// Index bookkeeping shared by every jet with the same `(nvars, order)`.
#[derive(Debug)]
pub struct JetLayout {
    nvars: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    degree_start: Vec<usize>,
    lookup: HashMap<Vec<u8>, usize>,
    // For each output coefficient α: the pairs (β, α−β) sorted by the index of β.
    products: Vec<Vec<(u32, u32)>>,
    // raise[e][i] = index of exponents[i] + e_e, for |exponents[i]| < order.
    raise: Vec<Vec<u32>>,
}

fn exponents_of_degree(nvars: usize, degree: usize) -> Vec<Vec<u8>> {
    fn rec(slot: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if slot + 1 == cur.len() {
            cur[slot] = left as u8;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[slot] = e as u8;
            rec(slot + 1, left - e, cur, out);
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0u8; nvars];
    rec(0, degree, &mut cur, &mut out);
    out
}

/// Binomial coefficient `C(n, k)` in exact integer arithmetic.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

impl JetLayout {
    fn build(nvars: usize, order: usize) -> Self {
        assert!(order < 256, "jet order too large");
        let mut exponents = Vec::with_capacity(binomial(nvars + order, order));
        let mut degree_start = Vec::with_capacity(order + 2);
        for d in 0..=order {
            degree_start.push(exponents.len());
            exponents.extend(exponents_of_degree(nvars, d));
        }
        degree_start.push(exponents.len());
        let lookup: HashMap<Vec<u8>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();

        let mut products = Vec::with_capacity(exponents.len());
        for alpha in &exponents {
            let deg: usize = alpha.iter().map(|&a| a as usize).sum();
            let mut pairs = Vec::new();
            for beta in exponents.iter().take(degree_start[deg + 1]) {
                if beta.iter().zip(alpha).all(|(b, a)| b <= a) {
                    let gamma: Vec<u8> = alpha.iter().zip(beta).map(|(a, b)| a - b).collect();
                    pairs.push((lookup[beta] as u32, lookup[&gamma] as u32));
                }
            }
            products.push(pairs);
        }

        let mut raise = vec![Vec::new(); nvars];
        for (e, table) in raise.iter_mut().enumerate() {
            for alpha in exponents.iter().take(degree_start[order]) {
                let mut up = alpha.clone();
                up[e] += 1;
                table.push(lookup[&up] as u32);
            }
        }

        JetLayout {
            nvars,
            order,
            exponents,
            degree_start,
            lookup,
            products,
            raise,
        }
    }

    /// Shared layout for `(nvars, order)`; built once per process.
    pub fn get(nvars: usize, order: usize) -> Arc<JetLayout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet layout cache poisoned");
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetLayout::build(nvars, order)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of coefficients, `C(n + k, k)`.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u8>] {
        &self.exponents
    }

    /// Range of coefficient indices with total degree `d`.
    pub fn degree_range(&self, d: usize) -> std::ops::Range<usize> {
        self.degree_start[d]..self.degree_start[d + 1]
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// `out[α] += scale · Σ_{β+γ=α} a[β]·b[γ]` over this layout's coefficients.
    ///
    /// `a` and `b` may belong to higher-order layouts; only their prefixes are read.
    pub fn mul_acc(&self, out: &mut [f64], a: &[f64], b: &[f64], scale: f64) {
        for (o, pairs) in out.iter_mut().zip(&self.products) {
            let mut s = 0.0;
            for &(i, j) in pairs {
                s += a[i as usize] * b[j as usize];
            }
            *o += scale * s;
        }
    }

    /// Pairs `(β, α − β)` contributing to output coefficient `alpha`, by increasing `β`.
    pub fn product_pairs(&self, alpha: usize) -> &[(u32, u32)] {
        &self.products[alpha]
    }

    /// Truncated product of two coefficient slices.
    pub fn mul(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.mul_acc(&mut out, a, b, 1.0);
        out
    }

    /// Coefficients of `∂f/∂x_var`, one order lower than this layout.
    pub fn partial(&self, coeffs: &[f64], var: usize) -> Vec<f64> {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        self.raise[var]
            .iter()
            .zip(&self.exponents)
            .map(|(&up, alpha)| (alpha[var] as f64 + 1.0) * coeffs[up as usize])
            .collect()
    }
}

/// Truncated Taylor expansion of a scalar function at a base point.
#[derive(Clone)]
pub struct TaylorJet {
    layout: Arc<JetLayout>,
    point: Arc<[f64]>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for TaylorJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TaylorJet")
            .field("point", &self.point)
            .field("order", &self.order())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl TaylorJet {
    pub fn from_coeffs(point: Arc<[f64]>, order: usize, coeffs: Vec<f64>) -> Self {
        let layout = JetLayout::get(point.len(), order);
        assert_eq!(coeffs.len(), layout.len(), "coefficient count mismatch");
        TaylorJet {
            layout,
            point,
            coeffs,
        }
    }

    pub fn constant(point: Arc<[f64]>, order: usize, value: f64) -> Self {
        let layout = JetLayout::get(point.len(), order);
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        TaylorJet {
            layout,
            point,
            coeffs,
        }
    }

    /// The coordinate function `x_var` expanded at the base point.
    pub fn variable(point: Arc<[f64]>, order: usize, var: usize) -> Self {
        let mut jet = Self::constant(point.clone(), order, point[var]);
        if order > 0 {
            // degree-1 block is e_0, e_1, ... in that order
            jet.coeffs[1 + var] = 1.0;
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn point(&self) -> &Arc<[f64]> {
        &self.point
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficient `∂^α f / α!`, zero beyond the truncation order.
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        self.layout.index_of(alpha).map_or(0.0, |i| self.coeffs[i])
    }

    /// Raw partial derivative `∂^α f` at the base point.
    pub fn derivative(&self, alpha: &[u8]) -> f64 {
        self.coeff(alpha) * multi_factorial(alpha)
    }

    pub fn truncate(&self, order: usize) -> TaylorJet {
        assert!(order <= self.order());
        let layout = JetLayout::get(self.nvars(), order);
        TaylorJet {
            coeffs: self.coeffs[..layout.len()].to_vec(),
            layout,
            point: self.point.clone(),
        }
    }

    pub fn partial(&self, var: usize) -> TaylorJet {
        let coeffs = self.layout.partial(&self.coeffs, var);
        TaylorJet {
            layout: JetLayout::get(self.nvars(), self.order() - 1),
            point: self.point.clone(),
            coeffs,
        }
    }

    fn check_compatible(&self, other: &TaylorJet) {
        assert_eq!(self.nvars(), other.nvars(), "jets over different variable counts");
        debug_assert!(
            Arc::ptr_eq(&self.point, &other.point) || self.point == other.point,
            "jets at different base points"
        );
    }

    fn lower_layout(&self, other: &TaylorJet) -> Arc<JetLayout> {
        if self.order() <= other.order() {
            self.layout.clone()
        } else {
            other.layout.clone()
        }
    }

    pub fn add(&self, other: &TaylorJet) -> TaylorJet {
        self.check_compatible(other);
        let layout = self.lower_layout(other);
        let coeffs = (0..layout.len())
            .map(|i| self.coeffs[i] + other.coeffs[i])
            .collect();
        TaylorJet {
            layout,
            point: self.point.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &TaylorJet) -> TaylorJet {
        self.check_compatible(other);
        let layout = self.lower_layout(other);
        let coeffs = (0..layout.len())
            .map(|i| self.coeffs[i] - other.coeffs[i])
            .collect();
        TaylorJet {
            layout,
            point: self.point.clone(),
            coeffs,
        }
    }

    pub fn mul(&self, other: &TaylorJet) -> TaylorJet {
        self.check_compatible(other);
        let layout = self.lower_layout(other);
        let coeffs = layout.mul(&self.coeffs, &other.coeffs);
        TaylorJet {
            layout,
            point: self.point.clone(),
            coeffs,
        }
    }

    pub fn neg(&self) -> TaylorJet {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> TaylorJet {
        TaylorJet {
            layout: self.layout.clone(),
            point: self.point.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Non-negative integer power by repeated squaring.
    pub fn powu(&self, mut p: u32) -> TaylorJet {
        let mut result = TaylorJet::constant(self.point.clone(), self.order(), 1.0);
        let mut base = self.clone();
        while p > 0 {
            if p & 1 == 1 {
                result = result.mul(&base);
            }
            p >>= 1;
            if p > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `Σ_m series[m] · (f − f(p))^m`, i.e. `φ ∘ f` when `series` holds the
    /// Taylor coefficients of `φ` at `f(p)`.
    ///
    /// Powers are accumulated in ascending order so that the low-degree
    /// coefficients do not depend on the truncation order.
    pub fn compose(&self, series: &[f64]) -> TaylorJet {
        let k = self.order();
        assert!(series.len() > k, "series shorter than the jet order");
        let mut h = self.coeffs.clone();
        h[0] = 0.0;
        let mut out = vec![0.0; self.layout.len()];
        out[0] = series[0];
        let mut power = h.clone();
        for (m, &c) in series.iter().enumerate().take(k + 1).skip(1) {
            if m > 1 {
                power = self.layout.mul(&power, &h);
            }
            for (o, p) in out.iter_mut().zip(&power) {
                *o += c * p;
            }
        }
        TaylorJet {
            layout: self.layout.clone(),
            point: self.point.clone(),
            coeffs: out,
        }
    }

    /// Evaluate the truncated polynomial `Σ c_α (x − p)^α`.
    pub fn eval_polynomial(&self, x: &[f64]) -> f64 {
        let dx: Vec<f64> = x.iter().zip(self.point.iter()).map(|(a, b)| a - b).collect();
        self.layout
            .exponents
            .iter()
            .zip(&self.coeffs)
            .map(|(alpha, c)| {
                c * alpha
                    .iter()
                    .zip(&dx)
                    .map(|(&e, d)| d.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

/// `α! = Π α_i!`.
pub fn multi_factorial(alpha: &[u8]) -> f64 {
    alpha
        .iter()
        .map(|&a| (1..=a as u32).map(f64::from).product::<f64>())
        .product()
}

/// Univariate Taylor coefficients of elementary functions, `φ^{(m)}(a)/m!`.
pub mod series {
    fn factorials(k: usize) -> Vec<f64> {
        let mut f = vec![1.0; k + 1];
        for m in 1..=k {
            f[m] = f[m - 1] * m as f64;
        }
        f
    }

    pub fn exp(a: f64, k: usize) -> Vec<f64> {
        let e = a.exp();
        factorials(k).iter().map(|f| e / f).collect()
    }

    /// Requires `a > 0`.
    pub fn ln(a: f64, k: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(a.ln());
        for m in 1..=k {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            out.push(sign / (m as f64 * a.powi(m as i32)));
        }
        out
    }

    /// Generalized binomial series of `a^p` for real `p`; requires `a > 0`
    /// unless `p` is an integer.
    pub fn power(a: f64, p: f64, k: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(k + 1);
        let mut binom = 1.0;
        for m in 0..=k {
            if m > 0 {
                binom *= (p - (m as f64 - 1.0)) / m as f64;
            }
            out.push(binom * a.powf(p - m as f64));
        }
        out
    }

    /// `1/(a+h)`; requires `a ≠ 0`.
    pub fn recip(a: f64, k: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(k + 1);
        let mut term = 1.0 / a;
        for _ in 0..=k {
            out.push(term);
            term *= -1.0 / a;
        }
        out
    }

    // Derivative cycles for the periodic and hyperbolic functions.
    fn cyclic(values: [f64; 4], k: usize) -> Vec<f64> {
        factorials(k)
            .iter()
            .enumerate()
            .map(|(m, f)| values[m % 4] / f)
            .collect()
    }

    pub fn sin(a: f64, k: usize) -> Vec<f64> {
        let (s, c) = a.sin_cos();
        cyclic([s, c, -s, -c], k)
    }

    pub fn cos(a: f64, k: usize) -> Vec<f64> {
        let (s, c) = a.sin_cos();
        cyclic([c, -s, -c, s], k)
    }

    pub fn sinh(a: f64, k: usize) -> Vec<f64> {
        let (s, c) = (a.sinh(), a.cosh());
        cyclic([s, c, s, c], k)
    }

    pub fn cosh(a: f64, k: usize) -> Vec<f64> {
        let (s, c) = (a.sinh(), a.cosh());
        cyclic([c, s, c, s], k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[f64]) -> Arc<[f64]> {
        Arc::from(v.to_vec())
    }

    #[test]
    fn coefficient_count_is_binomial() {
        for n in 1..=5 {
            for k in 0..=5 {
                assert_eq!(JetLayout::get(n, k).len(), binomial(n + k, k));
            }
        }
    }

    #[test]
    fn graded_lex_order() {
        let l = JetLayout::get(2, 2);
        let e: Vec<Vec<u8>> = l.exponents().to_vec();
        assert_eq!(
            e,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }

    #[test]
    fn lower_order_is_prefix() {
        let lo = JetLayout::get(3, 2);
        let hi = JetLayout::get(3, 4);
        assert_eq!(lo.exponents(), &hi.exponents()[..lo.len()]);
    }

    #[test]
    fn cube_expansion() {
        let p = pt(&[2.0]);
        let x = TaylorJet::variable(p, 3, 0);
        let c = x.powu(3);
        assert_eq!(c.coeffs(), &[8.0, 12.0, 6.0, 1.0]);
    }

    #[test]
    fn partial_of_product() {
        // f = x^2 y at (1, 2): ∂x f = 2xy, a jet of order 1: value 4, d/dx 2y=4, d/dy 2x=2
        let p = pt(&[1.0, 2.0]);
        let x = TaylorJet::variable(p.clone(), 2, 0);
        let y = TaylorJet::variable(p, 2, 1);
        let f = x.mul(&x).mul(&y);
        let fx = f.partial(0);
        assert_eq!(fx.order(), 1);
        assert!((fx.coeffs()[0] - 4.0).abs() < 1e-15);
        assert!((fx.coeffs()[1] - 4.0).abs() < 1e-15);
        assert!((fx.coeffs()[2] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_order_product_truncates() {
        let p = pt(&[0.5]);
        let a = TaylorJet::variable(p.clone(), 4, 0);
        let b = TaylorJet::variable(p, 2, 0);
        assert_eq!(a.mul(&b).order(), 2);
    }

    #[test]
    fn recip_series_inverts() {
        let p = pt(&[0.3, -0.2]);
        let x = TaylorJet::variable(p.clone(), 4, 0);
        let y = TaylorJet::variable(p, 4, 1);
        let f = x.add(&y.mul(&y)).add(&TaylorJet::constant(x.point().clone(), 4, 2.0));
        let inv = f.compose(&series::recip(f.value(), 4));
        let one = f.mul(&inv);
        assert!((one.coeffs()[0] - 1.0).abs() < 1e-14);
        for c in &one.coeffs()[1..] {
            assert!(c.abs() < 1e-14);
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(9, 5), 126);
        assert_eq!(binomial(3, 5), 0);
    }
}
