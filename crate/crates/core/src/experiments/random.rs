use crate::rng::SampleRng;
use crate::tensor::{curv_space_basis, CurvTensor, LorentzSym2, Sym2};

/// `Aᵀ η A` with `A = I + spread·N(0,1)`, redrawn until `A` is comfortably
/// nonsingular; Lorentzian by Sylvester's law of inertia.
pub fn random_lorentzian(n: usize, spread: f64, rng: &mut SampleRng) -> LorentzSym2 {
    loop {
        let a = nalgebra::DMatrix::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) + spread * rng.normal());
        if a.clone().svd(false, false).singular_values.min() < 0.1 {
            continue;
        }
        let eta = Sym2::minkowski(n).to_matrix();
        let g = a.transpose() * eta * a;
        if let Ok(g) = LorentzSym2::new(Sym2::from_matrix(&g)) {
            return g;
        }
    }
}

/// Standard-normal combination of the algebraic curvature basis.
pub fn random_curvature(n: usize, rng: &mut SampleRng) -> CurvTensor {
    let basis = curv_space_basis(n);
    let coeffs = rng.normal_vec(basis.len());
    CurvTensor::combination(&basis, &coeffs)
}
