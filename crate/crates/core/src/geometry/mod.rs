//! Curvature from metric jets, directional covariant derivatives of curvature
//! and geodesic integration.

mod alpha;
mod geodesic;
mod jets;

use std::sync::Arc;

use thiserror::Error;

use crate::chart::Chart;
use crate::expr::{DomainError, TaylorJet};
use crate::tensor::{CausalCharacter, LorentzSym2, Sym2, TensorError};

pub use alpha::{alpha_r, AlphaImage, CurvatureDerivatives};
pub use geodesic::{
    geodesic_flow, FlowOptions, GeodesicSample, GeodesicTrace, IntegratorStats, MAX_STEPS,
};
pub use jets::{
    christoffel_first_kind_jet, christoffel_jet, covariant_derivative_jet, inverse_metric_jet,
    riemann_from_jet, riemann_jet, TensorJet,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point has {got} coordinates, expected {expected}")]
    WrongDimension { expected: usize, got: usize },
    #[error("point {point:?} is outside the chart region: `{constraint}` fails")]
    OutsideRegion { point: Vec<f64>, constraint: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("metric at {point:?}: {source}")]
    Signature { point: Vec<f64>, source: TensorError },
    #[error("jet order {got} is too low, need at least {needed}")]
    InsufficientOrder { needed: usize, got: usize },
    #[error("tangent vector is zero")]
    ZeroVector,
    #[error("step {step} is too small for the time span")]
    StepUnderflow { step: f64 },
    #[error("{0}")]
    InvalidArgument(String),
}

/// Truncated Taylor data of all metric components at one point.
#[derive(Clone, Debug)]
pub struct MetricJet {
    point: Arc<[f64]>,
    order: usize,
    // lower triangle, (i, j) with i >= j at i(i+1)/2 + j
    components: Vec<TaylorJet>,
    base: LorentzSym2,
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

impl MetricJet {
    /// `components` lists the lower triangle row by row, all at one point and order.
    pub fn from_components(components: Vec<TaylorJet>) -> Result<Self, GeometryError> {
        let first = components.first().ok_or(GeometryError::WrongDimension {
            expected: 1,
            got: 0,
        })?;
        let point = first.point().clone();
        let order = first.order();
        let n = point.len();
        if components.len() != n * (n + 1) / 2 {
            return Err(GeometryError::WrongDimension {
                expected: n * (n + 1) / 2,
                got: components.len(),
            });
        }
        if components
            .iter()
            .any(|c| c.order() != order || c.point()[..] != point[..])
        {
            return Err(GeometryError::InvalidArgument(
                "metric component jets differ in base point or order".to_string(),
            ));
        }
        let value = Sym2::from_lower(n, |i, j| components[tri(i, j)].value());
        let base = LorentzSym2::new(value).map_err(|source| GeometryError::Signature {
            point: point.to_vec(),
            source,
        })?;
        Ok(MetricJet {
            point,
            order,
            components,
            base,
        })
    }

    pub fn n(&self) -> usize {
        self.point.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn point(&self) -> &Arc<[f64]> {
        &self.point
    }

    pub fn component(&self, i: usize, j: usize) -> &TaylorJet {
        &self.components[tri(i, j)]
    }

    /// The metric value `g(p)`.
    pub fn base(&self) -> &LorentzSym2 {
        &self.base
    }

    pub fn truncate(&self, order: usize) -> MetricJet {
        assert!(order <= self.order, "cannot raise jet order by truncation");
        MetricJet {
            point: self.point.clone(),
            order,
            components: self.components.iter().map(|c| c.truncate(order)).collect(),
            base: self.base.clone(),
        }
    }

    pub fn require_order(&self, needed: usize) -> Result<(), GeometryError> {
        if self.order < needed {
            Err(GeometryError::InsufficientOrder {
                needed,
                got: self.order,
            })
        } else {
            Ok(())
        }
    }

    /// The metric as a rank-2 [`TensorJet`] with all `n²` components.
    pub fn as_tensor_jet(&self) -> TensorJet {
        let n = self.n();
        let mut t = TensorJet::zeros(n, 2, self.point.clone(), self.order);
        for i in 0..n {
            for j in 0..n {
                t.coeffs_mut(i * n + j)
                    .copy_from_slice(self.component(i, j).coeffs());
            }
        }
        t
    }
}

/// `j^k_p g` for a chart: checks the region, evaluates every component jet and
/// certifies the Lorentzian signature of the base value.
pub fn metric_jet(chart: &Chart, p: &[f64], k: usize) -> Result<MetricJet, GeometryError> {
    let n = chart.dim();
    if p.len() != n {
        return Err(GeometryError::WrongDimension {
            expected: n,
            got: p.len(),
        });
    }
    if let Some(constraint) = chart.region_violation(p) {
        return Err(GeometryError::OutsideRegion {
            point: p.to_vec(),
            constraint,
        });
    }
    let point: Arc<[f64]> = p.into();
    let components = chart
        .components()
        .iter()
        .map(|e| e.evaluate_jet_at(&point, k))
        .collect::<Result<Vec<_>, _>>()?;
    MetricJet::from_components(components)
}

/// A nonzero tangent vector at a point with its causal character under `g(p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    point: Vec<f64>,
    components: Vec<f64>,
    causal: CausalCharacter,
}

impl TangentVector {
    pub fn new(point: &[f64], components: &[f64], g: &Sym2) -> Result<Self, GeometryError> {
        if components.len() != g.n() || point.len() != g.n() {
            return Err(GeometryError::WrongDimension {
                expected: g.n(),
                got: components.len(),
            });
        }
        if components.iter().all(|&c| c == 0.0) {
            return Err(GeometryError::ZeroVector);
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::InvalidArgument(
                "vector components must be finite".to_string(),
            ));
        }
        Ok(TangentVector {
            point: point.to_vec(),
            components: components.to_vec(),
            causal: CausalCharacter::classify(g, components),
        })
    }

    /// Builds the vector at the base point of `mj`.
    pub fn at(mj: &MetricJet, components: &[f64]) -> Result<Self, GeometryError> {
        TangentVector::new(mj.point(), components, mj.base())
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn causal_character(&self) -> CausalCharacter {
        self.causal
    }

    pub fn max_norm(&self) -> f64 {
        self.components.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `λX`; the causal character is unchanged for `λ ≠ 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self, GeometryError> {
        if lambda == 0.0 {
            return Err(GeometryError::ZeroVector);
        }
        Ok(TangentVector {
            point: self.point.clone(),
            components: self.components.iter().map(|c| c * lambda).collect(),
            causal: self.causal,
        })
    }
}
