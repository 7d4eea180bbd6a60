#![allow(dead_code)]

use gclab::chart::Chart;
use gclab::experiments::{catalog_chart, perturb_metric, PerturbationSpec};
use gclab::geometry::{metric_jet, CurvatureDerivatives, TangentVector};
use gclab::rng::SampleRng;
use nalgebra::DMatrix;

/// Minkowski in dimension `n` plus `amp` times random cubic polynomials,
/// signature-checked on `[−0.5, 0.5]^n`.
pub fn perturbed_minkowski(n: usize, amp: f64, seed: u64) -> Chart {
    let base = catalog_chart(&format!("minkowski{n}")).expect("built-in");
    let mut spec = PerturbationSpec::new(amp, 3, seed);
    spec.region_box = Some(vec![(-0.5, 0.5); n]);
    perturb_metric(&base, &spec).expect("small perturbation stays Lorentzian")
}

pub fn random_point(n: usize, half_width: f64, rng: &mut SampleRng) -> Vec<f64> {
    (0..n).map(|_| rng.uniform_in(-half_width, half_width)).collect()
}

pub fn metric_at(chart: &Chart, p: &[f64]) -> DMatrix<f64> {
    chart.metric_value(p).expect("in domain").to_matrix()
}

pub fn idx4(n: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * n + b) * n + c) * n + d
}

/// `R_abcd` from central differences of plain metric values:
/// `½(g_ad,bc + g_bc,ad − g_ac,bd − g_bd,ac) + g_pq(Γ^p_bc Γ^q_ad − Γ^p_bd Γ^q_ac)`.
pub fn fd_riemann(chart: &Chart, p: &[f64], h: f64) -> Vec<f64> {
    let n = p.len();
    let shifted = |moves: &[(usize, f64)]| {
        let mut q = p.to_vec();
        for &(i, s) in moves {
            q[i] += s;
        }
        metric_at(chart, &q)
    };
    let d1: Vec<DMatrix<f64>> = (0..n)
        .map(|c| (shifted(&[(c, h)]) - shifted(&[(c, -h)])) / (2.0 * h))
        .collect();
    let mut d2 = vec![DMatrix::zeros(n, n); n * n];
    for c in 0..n {
        for d in 0..n {
            d2[c * n + d] = (shifted(&[(c, h), (d, h)]) - shifted(&[(c, h), (d, -h)]) - shifted(&[(c, -h), (d, h)])
                + shifted(&[(c, -h), (d, -h)]))
                / (4.0 * h * h);
        }
    }
    let g = metric_at(chart, p);
    let ginv = g.clone().try_inverse().expect("nondegenerate");
    // first kind Γ_{p,bc}
    let gamma1 = |q: usize, b: usize, c: usize| 0.5 * (d1[b][(q, c)] + d1[c][(q, b)] - d1[q][(b, c)]);
    let gamma2 = |a: usize, b: usize, c: usize| (0..n).map(|q| ginv[(a, q)] * gamma1(q, b, c)).sum::<f64>();
    let gdd = |a: usize, b: usize, c: usize, d: usize| d2[c * n + d][(a, b)];
    let mut r = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = 0.5 * (gdd(a, d, b, c) + gdd(b, c, a, d) - gdd(a, c, b, d) - gdd(b, d, a, c));
                    for q in 0..n {
                        v += gamma1(q, b, c) * gamma2(q, a, d) - gamma1(q, b, d) * gamma2(q, a, c);
                    }
                    r[idx4(n, a, b, c, d)] = v;
                }
            }
        }
    }
    r
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Geodesic and parallel frame transported along it with classical RK4,
/// using Christoffel symbols from central differences of the metric.
pub struct Transport<'a> {
    pub chart: &'a Chart,
    pub h: f64,
}

impl Transport<'_> {
    fn christoffel(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let fd = 1e-5;
        let d1: Vec<DMatrix<f64>> = (0..n)
            .map(|c| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[c] += fd;
                xm[c] -= fd;
                (metric_at(self.chart, &xp) - metric_at(self.chart, &xm)) / (2.0 * fd)
            })
            .collect();
        let ginv = metric_at(self.chart, x).try_inverse().unwrap();
        let mut gamma = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    gamma[(a * n + b) * n + c] = (0..n)
                        .map(|q| ginv[(a, q)] * 0.5 * (d1[b][(q, c)] + d1[c][(q, b)] - d1[q][(b, c)]))
                        .sum();
                }
            }
        }
        gamma
    }

    /// State layout: `[x, v, e_0, …, e_{n−1}]`.
    fn rhs(&self, s: &[f64], n: usize) -> Vec<f64> {
        let gamma = self.christoffel(&s[..n]);
        let v = &s[n..2 * n];
        let mut out = vec![0.0; s.len()];
        out[..n].copy_from_slice(v);
        for block in 1..(2 + n) {
            let w = &s[block * n..(block + 1) * n];
            for a in 0..n {
                let mut acc = 0.0;
                for b in 0..n {
                    for c in 0..n {
                        acc += gamma[(a * n + b) * n + c] * v[b] * w[c];
                    }
                }
                out[block * n + a] = -acc;
            }
        }
        out
    }

    /// States at `t = 0, h, …, steps·h`.
    pub fn run(&self, x: &[f64], v: &[f64], frame: &[Vec<f64>], steps: usize) -> Vec<Vec<f64>> {
        let n = x.len();
        let mut s: Vec<f64> = x.iter().chain(v).copied().collect();
        for e in frame {
            s.extend_from_slice(e);
        }
        let mut out = vec![s.clone()];
        let h = self.h;
        let axpy = |a: &[f64], k: f64, b: &[f64]| a.iter().zip(b).map(|(x, y)| x + k * y).collect::<Vec<_>>();
        for _ in 0..steps {
            let k1 = self.rhs(&s, n);
            let k2 = self.rhs(&axpy(&s, h / 2.0, &k1), n);
            let k3 = self.rhs(&axpy(&s, h / 2.0, &k2), n);
            let k4 = self.rhs(&axpy(&s, h, &k3), n);
            s = (0..s.len()).map(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
            out.push(s.clone());
        }
        out
    }
}

/// Frame components of `R` at a transported state.
pub fn frame_riemann(chart: &Chart, state: &[f64], n: usize) -> Vec<f64> {
    let x = &state[..n];
    let mj = metric_jet(chart, x, 2).unwrap();
    let r = CurvatureDerivatives::compute(&mj, 1).unwrap().contracted(0, &[]);
    let e: Vec<&[f64]> = (0..n).map(|i| &state[(2 + i) * n..(3 + i) * n]).collect();
    let mut out = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    out[idx4(n, a, b, c, d)] = r.eval(e[a], e[b], e[c], e[d]);
                }
            }
        }
    }
    out
}

pub fn tangent(chart: &Chart, p: &[f64], x: &[f64]) -> TangentVector {
    TangentVector::new(p, x, &chart.metric_value(p).unwrap()).unwrap()
}

/// Random `(g, R, X)` triples for the Beem–Harris cross-check. Families by
/// `index % 4`: random curvature; null `X` with `R = K g∧○g + h∧○(X♭⊗X♭)`
/// (nongeneric); non-null `X` with `R = h∧○k`, `h` and `k` vanishing on `X`
/// (nongeneric); the nongeneric families plus a small random curvature (generic).
pub fn beem_harris_triple(seed: u64, index: u64) -> (gclab::tensor::LorentzSym2, gclab::tensor::CurvTensor, Vec<f64>) {
    use gclab::experiments::{causal_triplet, random_curvature, random_lorentzian};
    use gclab::tensor::{kulkarni_nomizu, Sym2};
    let mut rng = SampleRng::for_index(seed, index);
    let n = 3 + (index / 4 % 3) as usize;
    let g = random_lorentzian(n, 0.4, &mut rng);
    let triplet = causal_triplet(&g, &mut rng);
    let family = index % 4;
    let class = if family == 1 { 1 } else { (index / 12 % 3) as usize };
    let x = triplet[class].1.clone();
    let flat = g.lower(&x);
    let xx = Sym2::outer(&flat);
    let random_sym = |rng: &mut SampleRng| {
        let v = rng.normal_vec(n * (n + 1) / 2);
        let mut it = v.into_iter();
        Sym2::from_lower(n, |_, _| it.next().unwrap())
    };
    // h, k with h(X, ·) = k(X, ·) = 0 give R(·, X, ·, X) = 0 for h ∧○ k
    let annihilating = |rng: &mut SampleRng| {
        let gxx: f64 = flat.iter().zip(&x).map(|(a, b)| a * b).sum();
        let m = DMatrix::from_fn(n, n, |c, a| f64::from(u8::from(c == a)) - x[c] * flat[a] / gxx);
        let project = |h: Sym2| Sym2::from_matrix(&(m.transpose() * h.to_matrix() * &m));
        let h = project(random_sym(rng));
        let k = project(random_sym(rng));
        kulkarni_nomizu(&h, &k).unwrap()
    };
    let null_family = |rng: &mut SampleRng| {
        let k = rng.normal();
        let mut r = kulkarni_nomizu(&g, &g).unwrap().scaled(k);
        r.add_scaled(&kulkarni_nomizu(&random_sym(rng), &xx).unwrap(), 1.0);
        r
    };
    let r = match family {
        0 => random_curvature(n, &mut rng),
        1 => null_family(&mut rng),
        2 if class == 1 => null_family(&mut rng),
        2 => annihilating(&mut rng),
        _ => {
            let mut base = if class == 1 { null_family(&mut rng) } else { annihilating(&mut rng) };
            let delta = if rng.uniform() < 0.5 { 1e-2 } else { 1e-4 };
            let noise = random_curvature(n, &mut rng);
            base.add_scaled(&noise, delta * base.max_norm() / noise.max_norm());
            base
        }
    };
    (g, r, x)
}
