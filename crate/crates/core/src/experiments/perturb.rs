use std::str::FromStr;

use serde::Serialize;

use super::ExperimentError;
use crate::chart::Chart;
use crate::expr::{Expression, JetLayout, Node};
use crate::rng::SampleRng;
use crate::tensor::LorentzSym2;

/// Grid points per axis used to re-verify the signature after perturbing.
pub const GRID_POINTS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationSpec {
    pub seed: u64,
    pub amplitude: f64,
    pub degree: usize,
    /// Box on which the signature is verified; the chart's sampling box if unset.
    pub region_box: Option<Vec<(f64, f64)>>,
}

impl PerturbationSpec {
    pub fn new(amplitude: f64, degree: usize, seed: u64) -> Self {
        PerturbationSpec {
            seed,
            amplitude,
            degree,
            region_box: None,
        }
    }
}

/// `eps:degree:seed`, e.g. `0.05:3:7`.
impl FromStr for PerturbationSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected eps:degree:seed, got `{s}`"));
        }
        let amplitude: f64 = parts[0]
            .parse()
            .map_err(|_| format!("invalid amplitude `{}`", parts[0]))?;
        let degree: usize = parts[1]
            .parse()
            .map_err(|_| format!("invalid degree `{}`", parts[1]))?;
        let seed: u64 = parts[2]
            .parse()
            .map_err(|_| format!("invalid seed `{}`", parts[2]))?;
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(format!("amplitude must be finite and non-negative, got {amplitude}"));
        }
        Ok(PerturbationSpec::new(amplitude, degree, seed))
    }
}

fn monomial(alpha: &[u8]) -> Option<Node> {
    alpha
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| {
            if e == 1 {
                Node::Var(i)
            } else {
                Node::pow(Node::Var(i), e as i32)
            }
        })
        .reduce(Node::mul)
}

/// Random polynomial `Σ_{|α| ≤ d} c_α x^α` with `c_α` uniform in `[−1, 1]`,
/// monomials in graded-lexicographic order.
fn random_polynomial(n: usize, degree: usize, rng: &mut SampleRng) -> Node {
    let layout = JetLayout::get(n, degree);
    let mut acc: Option<Node> = None;
    for alpha in layout.exponents() {
        let c = rng.uniform_in(-1.0, 1.0);
        let term = match monomial(alpha) {
            Some(m) => Node::mul(Node::Const(c), m),
            None => Node::Const(c),
        };
        acc = Some(match acc {
            Some(a) => Node::add(a, term),
            None => term,
        });
    }
    acc.expect("at least the constant monomial")
}

/// Points of a `per_axis`-per-coordinate grid on `bounds`, endpoints included.
pub fn grid_points(bounds: &[(f64, f64)], per_axis: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for &(lo, hi) in bounds {
        let ticks: Vec<f64> = (0..per_axis)
            .map(|i| {
                if per_axis == 1 {
                    0.5 * (lo + hi)
                } else {
                    lo + (hi - lo) * i as f64 / (per_axis - 1) as f64
                }
            })
            .collect();
        out = out
            .into_iter()
            .flat_map(|p| {
                ticks.iter().map(move |&t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    out
}

/// Checks the Lorentzian signature on a grid over `bounds`, skipping points
/// outside the chart region.
pub fn signature_grid_check(
    chart: &Chart,
    bounds: &[(f64, f64)],
    per_axis: usize,
) -> Result<usize, ExperimentError> {
    let mut checked = 0;
    for p in grid_points(bounds, per_axis) {
        if !chart.in_region(&p) {
            continue;
        }
        let g = chart.metric_value(&p).map_err(|e| ExperimentError::SignatureLoss {
            point: p.clone(),
            detail: e.to_string(),
        })?;
        LorentzSym2::new(g).map_err(|e| ExperimentError::SignatureLoss {
            point: p.clone(),
            detail: e.to_string(),
        })?;
        checked += 1;
    }
    Ok(checked)
}

/// Adds `ε h_ab` to every metric component, with each `h_ab` an independent
/// random polynomial of degree ≤ d, and re-verifies the signature on a
/// `5`-per-axis grid. `ε = 0` returns the chart unchanged.
pub fn perturb_metric(base: &Chart, spec: &PerturbationSpec) -> Result<Chart, ExperimentError> {
    if !(spec.amplitude >= 0.0) || !spec.amplitude.is_finite() {
        return Err(ExperimentError::InvalidSpec(format!(
            "amplitude must be finite and non-negative, got {}",
            spec.amplitude
        )));
    }
    if spec.amplitude == 0.0 {
        return Ok(base.clone());
    }
    let n = base.dim();
    let bounds = spec
        .region_box
        .clone()
        .unwrap_or_else(|| base.sample_box().to_vec());
    if bounds.len() != n {
        return Err(ExperimentError::InvalidSpec(format!(
            "region box has {} axes, chart has {n}",
            bounds.len()
        )));
    }
    let mut rng = SampleRng::new(spec.seed);
    let components: Vec<Expression> = base
        .components()
        .iter()
        .map(|c| {
            let h = random_polynomial(n, spec.degree, &mut rng);
            let root = Node::add(c.root().clone(), Node::mul(Node::Const(spec.amplitude), h));
            Expression::new(root, base.coords().clone())
        })
        .collect();
    let name = format!(
        "{}+perturb({}:{}:{})",
        base.name(),
        spec.amplitude,
        spec.degree,
        spec.seed
    );
    let mut chart = Chart::new(&name, base.coords().clone(), components, base.region().to_vec())
        .with_sample_box(bounds.clone());
    let reference = base.reference_point();
    if chart.in_region(&reference) {
        chart = chart.with_reference(reference);
    }
    signature_grid_check(&chart, &bounds, GRID_POINTS)?;
    Ok(chart)
}
