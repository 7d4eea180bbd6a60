use super::jets::{christoffel_jet, covariant_derivative_jet, riemann_jet};
use super::{GeometryError, MetricJet, TangentVector};
use crate::tensor::CurvTensor;

/// Base-point values of the full covariant derivatives `R, ∇R, …, ∇^{m−1}R`,
/// each with its derivative slots appended after the four curvature slots.
#[derive(Clone, Debug)]
pub struct CurvatureDerivatives {
    n: usize,
    tensors: Vec<Vec<f64>>,
}

impl CurvatureDerivatives {
    /// Computes `count` tensors; needs a jet of order `count + 1`.
    pub fn compute(mj: &MetricJet, count: usize) -> Result<Self, GeometryError> {
        assert!(count >= 1);
        mj.require_order(count + 1)?;
        let mj = mj.truncate(count + 1);
        let gamma = christoffel_jet(&mj)?;
        let mut current = riemann_jet(&mj)?;
        let mut tensors = vec![current.values()];
        for _ in 1..count {
            current = covariant_derivative_jet(&current, &gamma)?;
            tensors.push(current.values());
        }
        Ok(CurvatureDerivatives {
            n: mj.n(),
            tensors,
        })
    }

    pub fn count(&self) -> usize {
        self.tensors.len()
    }

    /// Full `∇^k R` at the base point, rank `4 + k`, flat index order.
    pub fn full(&self, k: usize) -> &[f64] {
        &self.tensors[k]
    }

    /// `(∇^k R)(·,·,·,·; X, …, X)`.
    ///
    /// Its symmetry residual is audited against `‖R‖‖X‖^k`, since a
    /// vanishing derivative is computed as round-off.
    pub fn contracted(&self, k: usize, x: &[f64]) -> CurvTensor {
        let n = self.n;
        let mut v = self.tensors[k].clone();
        for _ in 0..k {
            v = v
                .chunks_exact(n)
                .map(|c| c.iter().zip(x).map(|(a, b)| a * b).sum())
                .collect();
        }
        let max = |t: &[f64]| t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = max(&self.tensors[0]) * max(x).powi(k as i32);
        CurvTensor::from_computed_scaled(n, v, scale)
    }
}

/// `(X, j¹g, R, ∇_X R, …, ∇^{r−1}_X R)` at one point.
#[derive(Clone, Debug)]
pub struct AlphaImage {
    pub x: TangentVector,
    pub g1: MetricJet,
    pub derivatives: Vec<CurvTensor>,
}

/// The map `α_r`.
///
/// `∇^k_X R` is the full `∇^k R` contracted with `X` in every derivative slot.
/// Along the geodesic with initial velocity `X` the parallel extension of `X`
/// is its tangent, so `∇_X X = 0` and iterated directional derivatives reduce
/// to these contractions; no transport is needed.
pub fn alpha_r(x: &TangentVector, mj: &MetricJet, r: usize) -> Result<AlphaImage, GeometryError> {
    if r == 0 {
        return Err(GeometryError::InvalidArgument("r must be at least 1".to_string()));
    }
    if x.point() != &mj.point()[..] {
        return Err(GeometryError::InvalidArgument(
            "vector and jet have different base points".to_string(),
        ));
    }
    let derivs = CurvatureDerivatives::compute(mj, r)?;
    Ok(AlphaImage {
        x: x.clone(),
        g1: mj.truncate(1),
        derivatives: (0..r).map(|k| derivs.contracted(k, x.components())).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::metric_jet;
    use super::*;
    use crate::chart::Chart;

    #[test]
    fn flat_alpha_vanishes() {
        let c = Chart::parse("dimension 4\ncoordinates t x y z\ng[0][0]=-1\ng[1][1]=1\ng[2][2]=1\ng[3][3]=1\n").unwrap();
        let mj = metric_jet(&c, &[0.0; 4], 4).unwrap();
        let x = TangentVector::at(&mj, &[1.0, 0.2, 0.0, 0.0]).unwrap();
        let a = alpha_r(&x, &mj, 3).unwrap();
        assert_eq!(a.derivatives.len(), 3);
        assert!(a.derivatives.iter().all(|d| d.max_norm() == 0.0));
        assert_eq!(a.g1.order(), 1);
    }

    #[test]
    fn order_is_checked() {
        let c = Chart::parse("dimension 2\ncoordinates t x\ng[0][0]=-1\ng[1][1]=1\n").unwrap();
        let mj = metric_jet(&c, &[0.0; 2], 2).unwrap();
        let x = TangentVector::at(&mj, &[1.0, 0.0]).unwrap();
        assert!(matches!(
            alpha_r(&x, &mj, 2),
            Err(GeometryError::InsufficientOrder { needed: 3, got: 2 })
        ));
    }
}
