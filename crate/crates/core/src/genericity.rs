//! Genericity and r-nongenericity of tangent vectors, the Beem–Harris
//! criterion, and scans of the genericity quantity along geodesics.

use serde::Serialize;

use crate::chart::Chart;
use crate::geometry::{
    geodesic_flow, metric_jet, riemann_from_jet, CurvatureDerivatives, FlowOptions,
    GeodesicTrace, GeometryError, MetricJet, TangentVector,
};
use crate::linalg::orthogonal_complement;
use crate::tensor::{kulkarni_nomizu, CausalCharacter, CurvTensor, Sym2, ZERO_FLOOR};

/// Default threshold on normalized magnitudes.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Consecutive sub-threshold samples at which a run counts as a plateau.
pub const PLATEAU_LENGTH: usize = 3;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `(X♭ ⊗ X♭) ∧○ R(·, X, ·, X)`.
pub fn generic_quantity(x: &[f64], g: &Sym2, r: &CurvTensor) -> CurvTensor {
    let flat = g.outer_flat(x);
    let s = r.contract_vector(x);
    kulkarni_nomizu(&flat, &s).expect("operands share the dimension of g")
}

/// `‖(X♭⊗X♭) ∧○ T(·,X,·,X)‖ / (‖g‖² ‖X‖⁴ D)` where `T = ∇^k_X R` and
/// `D = max(‖R‖ ‖X‖^k, ‖T‖)`; all norms are max norms. For `k = 0` this is
/// `‖Q‖ / (‖g‖² ‖X‖⁴ ‖R‖)`. Returns 0 when `D` is below the zero floor.
/// The value is invariant under `X → λX`.
pub fn normalized_magnitude_of(x: &[f64], g: &Sym2, r_norm: f64, t: &CurvTensor, k: usize) -> f64 {
    let xn = max_abs(x);
    let d = (r_norm * xn.powi(k as i32)).max(t.max_norm());
    if d <= ZERO_FLOOR || xn == 0.0 {
        return 0.0;
    }
    let q = generic_quantity(x, g, t).max_norm();
    let gn = g.max_norm();
    q / (gn * gn * xn.powi(4) * d)
}

/// Order-0 normalized genericity magnitude of `X` for curvature `R`.
pub fn normalized_magnitude(x: &[f64], g: &Sym2, r: &CurvTensor) -> f64 {
    normalized_magnitude_of(x, g, r.max_norm(), r, 0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericityVerdict {
    pub point: Vec<f64>,
    pub vector: Vec<f64>,
    pub causal_character: CausalCharacter,
    /// `m_0, …, m_r`; a single entry for a plain genericity test.
    pub magnitudes: Vec<f64>,
    /// `m_0 > tol`.
    pub generic: bool,
    /// Order of the nongenericity test, when one was run.
    pub r: Option<usize>,
    /// Every `m_k ≤ tol` for `k ≤ r`, when an r-test was run.
    pub r_nongeneric: Option<bool>,
    pub tol: f64,
}

impl GenericityVerdict {
    pub fn magnitude(&self) -> f64 {
        self.magnitudes[0]
    }
}

fn check_tol(tol: f64) -> Result<(), GeometryError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::InvalidArgument(format!("tol must be positive, got {tol}")))
    }
}

/// Decides whether `X` is generic at the base point of `mj` (order ≥ 2).
pub fn is_generic(x: &TangentVector, mj: &MetricJet, tol: f64) -> Result<GenericityVerdict, GeometryError> {
    check_tol(tol)?;
    let r = riemann_from_jet(mj)?;
    let m = normalized_magnitude(x.components(), mj.base(), &r);
    Ok(GenericityVerdict {
        point: x.point().to_vec(),
        vector: x.components().to_vec(),
        causal_character: x.causal_character(),
        magnitudes: vec![m],
        generic: m > tol,
        r: None,
        r_nongeneric: None,
        tol,
    })
}

/// Magnitudes `m_0…m_r` from precomputed curvature derivatives (at least `r + 1`).
pub fn magnitudes_from_derivatives(
    x: &[f64],
    g: &Sym2,
    derivs: &CurvatureDerivatives,
    r: usize,
) -> Vec<f64> {
    assert!(derivs.count() > r, "need r + 1 curvature derivatives");
    let r0 = derivs.contracted(0, x);
    let r_norm = r0.max_norm();
    (0..=r)
        .map(|k| {
            if k == 0 {
                normalized_magnitude_of(x, g, r_norm, &r0, 0)
            } else {
                normalized_magnitude_of(x, g, r_norm, &derivs.contracted(k, x), k)
            }
        })
        .collect()
}

/// Tests whether `X` is r-nongeneric: `m_k ≤ tol` for every `k ∈ [0, r]`, where
/// `m_k` is the normalized magnitude of `(X♭⊗X♭) ∧○ (∇^k_X R)(·,X,·,X)`.
/// Needs a metric jet of order `r + 2`.
pub fn is_r_nongeneric(
    x: &TangentVector,
    mj: &MetricJet,
    r: usize,
    tol: f64,
) -> Result<GenericityVerdict, GeometryError> {
    check_tol(tol)?;
    mj.require_order(r + 2)?;
    let derivs = CurvatureDerivatives::compute(mj, r + 1)?;
    Ok(verdict_from_derivatives(x, mj.base(), &derivs, r, tol))
}

/// [`is_r_nongeneric`] with the curvature derivatives already computed.
pub fn verdict_from_derivatives(
    x: &TangentVector,
    g: &Sym2,
    derivs: &CurvatureDerivatives,
    r: usize,
    tol: f64,
) -> GenericityVerdict {
    let magnitudes = magnitudes_from_derivatives(x.components(), g, derivs, r);
    GenericityVerdict {
        point: x.point().to_vec(),
        vector: x.components().to_vec(),
        causal_character: x.causal_character(),
        generic: magnitudes[0] > tol,
        r_nongeneric: Some(magnitudes.iter().all(|&m| m <= tol)),
        r: Some(r),
        magnitudes,
        tol,
    }
}

/// True iff `R(A_i, X, A_j, X)` vanishes for a basis `{A_i}` of `X⊥`, each pair
/// judged against `tol · ‖R‖ · ‖X‖² · ‖A_i‖ · ‖A_j‖` (max norms).
pub fn beem_harris_test(x: &[f64], g: &Sym2, r: &CurvTensor, tol: f64) -> bool {
    let rn = r.max_norm();
    if rn <= ZERO_FLOOR {
        return true;
    }
    let xn = max_abs(x);
    let s = r.contract_vector(x);
    let basis = orthogonal_complement(g, x);
    let norms: Vec<f64> = basis.iter().map(|a| max_abs(a)).collect();
    for (i, a) in basis.iter().enumerate() {
        let sa = s.lower(a);
        for (j, b) in basis.iter().enumerate().skip(i) {
            let v: f64 = sa.iter().zip(b).map(|(p, q)| p * q).sum();
            if v.abs() > tol * rn * xn * xn * norms[i] * norms[j] {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    /// Fewer than [`PLATEAU_LENGTH`] samples, generic samples on both sides.
    IsolatedDip,
    /// At least [`PLATEAU_LENGTH`] consecutive samples.
    Plateau,
    /// Short run touching an end of the window.
    Edge,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubThresholdRun {
    pub start: usize,
    pub end: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub kind: RunKind,
    /// r-nongenericity of the tangent at the first sample of the run.
    pub r_nongeneric_at_start: Option<bool>,
    pub magnitudes_at_start: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub t_span: (f64, f64),
    pub r: usize,
    pub tol: f64,
    pub samples: usize,
    pub generic_samples: usize,
    /// Some sample in the window is generic.
    pub generic_found: bool,
    pub runs: Vec<SubThresholdRun>,
    pub plateaus: usize,
    pub isolated_dips: usize,
    pub truncated: bool,
    pub plateau_length: usize,
    pub note: String,
    #[serde(skip)]
    pub trace: GeodesicTrace,
}

impl ScanReport {
    /// One-line window verdict.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "generic point found: {}; {} plateau{}, {} isolated dip{}",
            if self.generic_found { "yes" } else { "no" },
            self.plateaus,
            if self.plateaus == 1 { "" } else { "s" },
            self.isolated_dips,
            if self.isolated_dips == 1 { "" } else { "s" },
        );
        if self.plateaus == 1 && self.runs.len() == 1 && self.runs[0].start == 0 && self.runs[0].end + 1 == self.samples {
            s.push_str("; plateau over full window");
        }
        if self.truncated {
            s.push_str("; trace truncated");
        }
        s
    }
}

/// Integrates the geodesic from `x0`, annotates the order-0 magnitude at every
/// sample and classifies the runs where it stays at or below `tol`.
///
/// Verdicts refer to the finite parameter window only; a plateau is a
/// resolution-dependent signal (at least [`PLATEAU_LENGTH`] consecutive
/// samples), not a proof of non-discreteness.
pub fn scan_geodesic(
    chart: &Chart,
    x0: &TangentVector,
    t_span: (f64, f64),
    step: f64,
    r: usize,
    tol: f64,
) -> Result<ScanReport, GeometryError> {
    check_tol(tol)?;
    let trace = geodesic_flow(chart, x0, t_span, step, FlowOptions::default())?;
    let m: Vec<f64> = trace
        .samples
        .iter()
        .map(|s| s.genericity_magnitude.unwrap_or(0.0))
        .collect();
    let generic_samples = m.iter().filter(|&&v| v > tol).count();

    let mut runs = Vec::new();
    let mut i = 0;
    while i < m.len() {
        if m[i] > tol {
            i += 1;
            continue;
        }
        let start = i;
        while i < m.len() && m[i] <= tol {
            i += 1;
        }
        let end = i - 1;
        let len = end - start + 1;
        let kind = if len >= PLATEAU_LENGTH {
            RunKind::Plateau
        } else if start > 0 && end + 1 < m.len() {
            RunKind::IsolatedDip
        } else {
            RunKind::Edge
        };
        let s = &trace.samples[start];
        let (flag, mags) = match metric_jet(chart, &s.x, r + 2) {
            Ok(mj) => {
                let v = TangentVector::at(&mj, &s.xdot)?;
                let verdict = is_r_nongeneric(&v, &mj, r, tol)?;
                (verdict.r_nongeneric, verdict.magnitudes)
            }
            Err(_) => (None, Vec::new()),
        };
        runs.push(SubThresholdRun {
            start,
            end,
            t_start: trace.samples[start].t,
            t_end: trace.samples[end].t,
            kind,
            r_nongeneric_at_start: flag,
            magnitudes_at_start: mags,
        });
    }
    let plateaus = runs.iter().filter(|r| r.kind == RunKind::Plateau).count();
    let isolated_dips = runs.iter().filter(|r| r.kind == RunKind::IsolatedDip).count();
    let (t0, t1) = t_span;
    let t_last = trace.samples.last().map_or(t0, |s| s.t);
    Ok(ScanReport {
        t_span,
        r,
        tol,
        samples: m.len(),
        generic_samples,
        generic_found: generic_samples > 0,
        runs,
        plateaus,
        isolated_dips,
        truncated: trace.truncated,
        plateau_length: PLATEAU_LENGTH,
        note: format!(
            "verdicts cover the parameter window [{t0}, {t_last}] of requested [{t0}, {t1}] only; \
             inextendible geodesics are not certified"
        ),
        trace,
    })
}
