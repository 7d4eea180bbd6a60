use std::collections::HashMap;
use std::sync::Arc;

use crate::expr::binomial;

/// Index bookkeeping for `S₂ ⊗ S_{r+1}`: tensors `Q_{ab | c i₁…i_r}` symmetric in
/// `(a, b)` and in the `r + 1` trailing slots.
///
/// The canonical basis is indexed by a pair `a ≤ b` and a sorted multiset of
/// `r + 1` slot values, pairs outer and multisets inner, both in lexicographic
/// order. The basis element for `(pair, multiset)` is the tensor equal to 1 at
/// every index arrangement of that pair and multiset.
#[derive(Clone, Debug)]
pub struct SymPairLayout {
    n: usize,
    r: usize,
    pairs: Vec<(usize, usize)>,
    multisets: Vec<Vec<u8>>,
    multiset_index: HashMap<Vec<u8>, usize>,
}

fn sorted_multisets(n: usize, size: usize) -> Vec<Vec<u8>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v as u8);
            rec(v, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, size, &mut Vec::new(), &mut out);
    out
}

impl SymPairLayout {
    /// Layout for order `r ≥ 1` (trailing group of `r + 1` slots).
    pub fn new(n: usize, r: usize) -> Self {
        assert!(n >= 1 && r >= 1);
        let pairs = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
        let multisets = sorted_multisets(n, r + 1);
        debug_assert_eq!(multisets.len(), binomial(n + r, r + 1));
        let multiset_index = multisets
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        SymPairLayout {
            n,
            r,
            pairs,
            multisets,
            multiset_index,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.pairs.len() * self.multisets.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn multisets(&self) -> &[Vec<u8>] {
        &self.multisets
    }

    /// Basis index of the entry `Q_{ab | group}`.
    pub fn index(&self, a: usize, b: usize, group: &[usize]) -> usize {
        assert_eq!(group.len(), self.r + 1, "trailing group has the wrong length");
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let pair = self.pair_position(a, b);
        let mut key: Vec<u8> = group.iter().map(|&g| g as u8).collect();
        key.sort_unstable();
        pair * self.multisets.len() + self.multiset_index[&key]
    }

    fn pair_position(&self, a: usize, b: usize) -> usize {
        // rows a' < a contribute n - a' pairs each
        (0..a).map(|k| self.n - k).sum::<usize>() + (b - a)
    }

    /// `(pair, multiset)` of a basis index.
    pub fn decompose(&self, index: usize) -> ((usize, usize), &[u8]) {
        let m = self.multisets.len();
        (self.pairs[index / m], &self.multisets[index % m])
    }
}

/// An element of `S₂ ⊗ S_{r+1}`, stored by its canonical-basis coordinates.
#[derive(Clone, Debug)]
pub struct SymPairTensor {
    layout: Arc<SymPairLayout>,
    values: Vec<f64>,
}

impl SymPairTensor {
    pub fn zeros(layout: Arc<SymPairLayout>) -> Self {
        let values = vec![0.0; layout.dim()];
        SymPairTensor { layout, values }
    }

    pub fn from_values(layout: Arc<SymPairLayout>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), layout.dim());
        SymPairTensor { layout, values }
    }

    pub fn layout(&self) -> &SymPairLayout {
        &self.layout
    }

    pub fn get(&self, a: usize, b: usize, group: &[usize]) -> f64 {
        self.values[self.layout.index(a, b, group)]
    }

    /// Writes every arrangement of `(a, b | group)` at once.
    pub fn set(&mut self, a: usize, b: usize, group: &[usize], v: f64) {
        let i = self.layout.index(a, b, group);
        self.values[i] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_counts() {
        let l = SymPairLayout::new(4, 1);
        assert_eq!(l.dim(), 10 * 10);
        let l = SymPairLayout::new(5, 3);
        assert_eq!(l.dim(), 15 * 70);
    }

    #[test]
    fn index_is_symmetric() {
        let l = Arc::new(SymPairLayout::new(4, 2));
        let i = l.index(2, 1, &[3, 0, 1]);
        assert_eq!(i, l.index(1, 2, &[1, 3, 0]));
        assert_eq!(i, l.index(1, 2, &[0, 1, 3]));
        let ((a, b), m) = l.decompose(i);
        assert_eq!((a, b), (1, 2));
        assert_eq!(m, &[0, 1, 3]);
        let mut q = SymPairTensor::zeros(l);
        q.set(3, 0, &[2, 2, 1], 5.0);
        assert_eq!(q.get(0, 3, &[2, 1, 2]), 5.0);
    }

    #[test]
    fn every_index_round_trips() {
        let l = SymPairLayout::new(3, 2);
        for i in 0..l.dim() {
            let ((a, b), m) = l.decompose(i);
            let g: Vec<usize> = m.iter().map(|&v| v as usize).collect();
            assert_eq!(l.index(b, a, &g), i);
        }
    }
}
