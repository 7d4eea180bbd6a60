//! Seeded random numbers with a fixed, portable recipe.
//!
//! The generator is PCG-XSL-RR 128/64 (`rand_pcg::Pcg64`) seeded through
//! `SeedableRng::seed_from_u64`. Floats are derived by hand so the sequence
//! does not depend on any distribution crate: `uniform = (u64 >> 11) · 2⁻⁵³`,
//! and normals use the cosine branch of Box–Muller with `1 − uniform` as the
//! radius variate. Per-item streams use a SplitMix64 hash of `(seed, index)`,
//! which keeps results independent of evaluation order.

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

pub struct SampleRng {
    inner: Pcg64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        SampleRng {
            inner: Pcg64::seed_from_u64(seed),
        }
    }

    /// Independent stream for item `index` of a run seeded with `seed`.
    pub fn for_index(seed: u64, index: u64) -> Self {
        SampleRng::new(splitmix64(seed ^ splitmix64(index.wrapping_add(1))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn normal_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.normal()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        let a: Vec<u64> = (0..4).map(|_| SampleRng::new(7).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut r = SampleRng::for_index(7, 3);
        let mut s = SampleRng::for_index(7, 3);
        assert_eq!(r.uniform(), s.uniform());
        assert_ne!(SampleRng::for_index(7, 3).next_u64(), SampleRng::for_index(7, 4).next_u64());
    }

    #[test]
    fn ranges() {
        let mut r = SampleRng::new(1);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
            assert!(r.normal().is_finite());
        }
        let mean: f64 = (0..20_000).map(|_| r.normal()).sum::<f64>() / 20_000.0;
        assert!(mean.abs() < 0.05);
    }
}
