mod common;

use common::*;
use gclab::experiments::{catalog_chart, causal_triplet};
use gclab::genericity::{
    beem_harris_test, generic_quantity, is_generic, is_r_nongeneric, normalized_magnitude, DEFAULT_TOL,
};
use gclab::geometry::{alpha_r, metric_jet, riemann_from_jet, TangentVector};
use gclab::rng::SampleRng;
use gclab::tensor::CausalCharacter;
use proptest::prelude::*;

#[test]
fn beem_harris_agrees_with_generic_quantity() {
    let mut nongeneric = 0;
    for i in 0..400 {
        let (g, r, x) = beem_harris_triple(5, i);
        let bh = beem_harris_test(&x, &g, &r, DEFAULT_TOL);
        let m = normalized_magnitude(&x, &g, &r);
        assert_eq!(bh, m <= DEFAULT_TOL, "triple {i}: m = {m:e}");
        nongeneric += usize::from(bh);
    }
    assert!((150..=250).contains(&nongeneric), "{nongeneric}");
}

#[test]
fn nongeneric_families_are_nonzero() {
    for i in [1, 2, 5, 6, 9, 10] {
        let (_, r, _) = beem_harris_triple(5, i);
        assert!(r.max_norm() > 1e-3);
        assert!(r.residual() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn verdicts_are_scale_invariant(i in 0u64..10_000, lambda in prop_oneof![-50.0f64..-0.02, 0.02f64..50.0]) {
        let (g, r, x) = beem_harris_triple(17, i);
        let scaled: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        let m = normalized_magnitude(&x, &g, &r);
        let ms = normalized_magnitude(&scaled, &g, &r);
        prop_assert!((m - ms).abs() <= 1e-12 * m.max(1e-300) + 1e-15);
        prop_assert_eq!(m <= DEFAULT_TOL, ms <= DEFAULT_TOL);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(normalized_magnitude(&neg, &g, &r), m);
        let q = generic_quantity(&x, &g, &r).max_norm();
        let qs = generic_quantity(&scaled, &g, &r).max_norm();
        // (X♭⊗X♭) ∧○ R(·,X,·,X) is homogeneous of degree 4 in X
        let natural = g.max_norm().powi(2) * max_abs(&x).powi(4) * r.max_norm();
        prop_assert!((qs - lambda.powi(4) * q).abs() <= 1e-9 * qs + 1e-13 * lambda.powi(4) * natural);
    }
}

#[test]
fn alpha_matches_parallel_transport() {
    for (n, seed) in [(3usize, 1u64), (4, 2)] {
        let chart = perturbed_minkowski(n, 0.2, 300 + seed);
        let mut rng = SampleRng::new(seed);
        let p = random_point(n, 0.3, &mut rng);
        let mj = metric_jet(&chart, &p, 4).unwrap();
        let frame = mj.base().orthonormal_frame();
        let x: Vec<f64> = (0..n).map(|i| frame[0][i] + 0.3 * frame[1][i]).collect();
        let alpha = alpha_r(&TangentVector::at(&mj, &x).unwrap(), &mj, 3).unwrap();
        let h = 1e-2;
        let tr = Transport { chart: &chart, h };
        let fwd = tr.run(&p, &x, &frame, 2);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let bwd = tr.run(&p, &neg, &frame, 2);
        let r = |s: &Vec<f64>| frame_riemann(&chart, s, n);
        let (rp2, rp1, r0, rm1, rm2) = (r(&fwd[2]), r(&fwd[1]), r(&fwd[0]), r(&bwd[1]), r(&bwd[2]));
        let len = r0.len();
        let d1: Vec<f64> = (0..len).map(|i| (-rp2[i] + 8.0 * rp1[i] - 8.0 * rm1[i] + rm2[i]) / (12.0 * h)).collect();
        let d2: Vec<f64> = (0..len)
            .map(|i| (-rp2[i] + 16.0 * rp1[i] - 30.0 * r0[i] + 16.0 * rm1[i] - rm2[i]) / (12.0 * h * h))
            .collect();
        for (k, oracle) in [(0usize, &r0), (1, &d1), (2, &d2)] {
            let t = &alpha.derivatives[k];
            let mut framed = vec![0.0; len];
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            framed[idx4(n, a, b, c, d)] = t.eval(&frame[a], &frame[b], &frame[c], &frame[d]);
                        }
                    }
                }
            }
            let rel = max_diff(&framed, oracle) / max_abs(oracle);
            assert!(rel <= 1e-4, "n={n} k={k}: {rel:e}");
            assert!(t.residual() <= 1e-10);
        }
    }
}

#[test]
fn constant_curvature_verdicts() {
    let chart = catalog_chart("desitter4").unwrap();
    let mut rng = SampleRng::new(8);
    for _ in 0..10 {
        let p = random_point(4, 0.5, &mut rng);
        let mj = metric_jet(&chart, &p, 3).unwrap();
        let r = riemann_from_jet(&mj).unwrap();
        for (class, x) in causal_triplet(mj.base(), &mut rng) {
            let v = is_r_nongeneric(&TangentVector::at(&mj, &x).unwrap(), &mj, 1, DEFAULT_TOL).unwrap();
            let bh = beem_harris_test(&x, mj.base(), &r, DEFAULT_TOL);
            match class {
                CausalCharacter::Null => assert!(v.r_nongeneric == Some(true) && bh),
                _ => assert!(v.generic && !bh),
            }
        }
    }
}

#[test]
fn ppwave_directions_at_random_points() {
    let chart = catalog_chart("ppwave").unwrap();
    let mut rng = SampleRng::new(21);
    for _ in 0..10 {
        let p = random_point(4, 1.0, &mut rng);
        let mj = metric_jet(&chart, &p, 5).unwrap();
        let dv = TangentVector::at(&mj, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let v = is_r_nongeneric(&dv, &mj, 3, DEFAULT_TOL).unwrap();
        assert_eq!(v.r_nongeneric, Some(true));
        assert!(v.magnitudes.iter().all(|&m| m == 0.0));
        let du = TangentVector::at(&mj, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(is_generic(&du, &mj, DEFAULT_TOL).unwrap().generic);
    }
}

#[test]
fn schwarzschild_radial_null_directions_are_nongeneric() {
    let chart = catalog_chart("schwarzschild").unwrap();
    for r in [3.0, 5.0, 10.0] {
        let p = [0.0, r, 1.2, 0.4];
        let mj = metric_jet(&chart, &p, 2).unwrap();
        let f = 1.0 - 2.0 / r;
        for sign in [1.0, -1.0] {
            let x = TangentVector::at(&mj, &[1.0, sign * f, 0.0, 0.0]).unwrap();
            assert_eq!(x.causal_character(), CausalCharacter::Null);
            assert!(!is_generic(&x, &mj, DEFAULT_TOL).unwrap().generic);
        }
        let tangential = TangentVector::at(&mj, &[1.0, 0.0, 0.0, f.sqrt() / (r * 1.2f64.sin())]).unwrap();
        assert_eq!(tangential.causal_character(), CausalCharacter::Null);
        assert!(is_generic(&tangential, &mj, DEFAULT_TOL).unwrap().generic);
    }
}
