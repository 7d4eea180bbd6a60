use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::ExperimentError;
use crate::chart::Chart;
use crate::geometry::{metric_jet, CurvatureDerivatives, TangentVector};
use crate::genericity::verdict_from_derivatives;
use crate::rng::SampleRng;
use crate::tensor::{CausalCharacter, Sym2};

/// Version of the census JSON layout.
pub const CENSUS_SCHEMA_VERSION: u32 = 1;

/// Rejection-sampling attempts per point before giving up.
pub const MAX_REJECTIONS: usize = 10_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub timelike: usize,
    pub null: usize,
    pub spacelike: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.timelike + self.null + self.spacelike
    }

    fn bump(&mut self, c: CausalCharacter) {
        match c {
            CausalCharacter::Timelike => self.timelike += 1,
            CausalCharacter::Null => self.null += 1,
            CausalCharacter::Spacelike => self.spacelike += 1,
        }
    }

    pub fn get(&self, c: CausalCharacter) -> usize {
        match c {
            CausalCharacter::Timelike => self.timelike,
            CausalCharacter::Null => self.null,
            CausalCharacter::Spacelike => self.spacelike,
        }
    }
}

/// One tested vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusSample {
    pub index: usize,
    pub point: Vec<f64>,
    pub vector: Vec<f64>,
    /// Class the vector was constructed to have.
    pub constructed: CausalCharacter,
    /// Class reported by the tolerance band.
    pub causal_character: CausalCharacter,
    /// `|g(X,X)| / (‖g‖ ‖X‖²)`.
    pub relative_norm: f64,
    pub magnitudes: Vec<f64>,
    pub generic: bool,
    pub r_nongeneric: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusReport {
    pub schema_version: u32,
    pub chart: String,
    pub n_samples: usize,
    pub r: usize,
    pub tol: f64,
    pub seed: u64,
    pub sample_box: Vec<(f64, f64)>,
    pub counts: ClassCounts,
    pub generic: ClassCounts,
    pub r_nongeneric: ClassCounts,
    pub generic_fraction: f64,
    pub r_nongeneric_count: usize,
    #[serde(skip)]
    pub samples: Vec<CensusSample>,
}

impl CensusReport {
    /// Per-vector CSV dump.
    pub fn write_samples_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "index",
            "point",
            "vector",
            "constructed",
            "causal_character",
            "relative_norm",
            "magnitudes",
            "generic",
            "r_nongeneric",
        ])?;
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        for s in &self.samples {
            w.write_record([
                s.index.to_string(),
                join(&s.point),
                join(&s.vector),
                s.constructed.to_string(),
                s.causal_character.to_string(),
                format!("{:e}", s.relative_norm),
                s.magnitudes.iter().map(|m| format!("{m:e}")).collect::<Vec<_>>().join(" "),
                s.generic.to_string(),
                s.r_nongeneric.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn sample_point(chart: &Chart, bounds: &[(f64, f64)], rng: &mut SampleRng) -> Option<Vec<f64>> {
    for _ in 0..MAX_REJECTIONS {
        let p: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.uniform_in(lo, hi)).collect();
        if chart.in_region(&p) {
            return Some(p);
        }
    }
    None
}

/// One timelike `e₀ + s·u`, one null `e₀ + u` and one spacelike `s·e₀ + u`
/// vector from a `g`-orthonormal frame, with `u` a random unit spatial
/// direction and `s` uniform in `[0, 0.9)`.
pub fn causal_triplet(g: &crate::tensor::LorentzSym2, rng: &mut SampleRng) -> [(CausalCharacter, Vec<f64>); 3] {
    let n = g.n();
    let frame = g.orthonormal_frame();
    let w = loop {
        let w = rng.normal_vec(n - 1);
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-8 {
            break w.into_iter().map(|v| v / norm).collect::<Vec<_>>();
        }
    };
    let s = rng.uniform_in(0.0, 0.9);
    let combo = |c0: f64, cu: f64| -> Vec<f64> {
        (0..n)
            .map(|i| c0 * frame[0][i] + cu * w.iter().zip(&frame[1..]).map(|(wk, e)| wk * e[i]).sum::<f64>())
            .collect()
    };
    [
        (CausalCharacter::Timelike, combo(1.0, s)),
        (CausalCharacter::Null, combo(1.0, 1.0)),
        (CausalCharacter::Spacelike, combo(s, 1.0)),
    ]
}

fn relative_norm(g: &Sym2, x: &[f64]) -> f64 {
    let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    g.inner(x, x).abs() / (g.max_norm() * xn * xn)
}

/// Samples `n_samples` points uniformly in `bounds ∩ region` and tests one
/// timelike, one null and one spacelike vector at each for r-nongenericity.
/// Point `i` draws from its own stream, so the report does not depend on the
/// thread schedule.
pub fn genericity_census(
    chart: &Chart,
    n_samples: usize,
    r: usize,
    seed: u64,
    tol: f64,
    bounds: Option<&[(f64, f64)]>,
) -> Result<CensusReport, ExperimentError> {
    if n_samples == 0 {
        return Err(ExperimentError::InvalidSpec("need at least one sample".to_string()));
    }
    if !(tol > 0.0) {
        return Err(ExperimentError::InvalidSpec(format!("tol must be positive, got {tol}")));
    }
    let bounds: Vec<(f64, f64)> = bounds.map_or_else(|| chart.sample_box().to_vec(), |b| b.to_vec());
    if bounds.len() != chart.dim() {
        return Err(ExperimentError::InvalidSpec(format!(
            "sampling box has {} axes, chart has {}",
            bounds.len(),
            chart.dim()
        )));
    }
    let per_point: Vec<Result<Vec<CensusSample>, ExperimentError>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = SampleRng::for_index(seed, i as u64);
            let p = sample_point(chart, &bounds, &mut rng).ok_or_else(|| {
                ExperimentError::Sampling(format!(
                    "no point of the sampling box satisfied the region after {MAX_REJECTIONS} tries"
                ))
            })?;
            let mj = metric_jet(chart, &p, r + 2)?;
            let derivs = CurvatureDerivatives::compute(&mj, r + 1)?;
            causal_triplet(mj.base(), &mut rng)
                .into_iter()
                .map(|(constructed, x)| {
                    let v = TangentVector::at(&mj, &x)?;
                    let verdict = verdict_from_derivatives(&v, mj.base(), &derivs, r, tol);
                    Ok(CensusSample {
                        index: i,
                        point: p.clone(),
                        relative_norm: relative_norm(mj.base(), &x),
                        vector: x,
                        constructed,
                        causal_character: v.causal_character(),
                        generic: verdict.generic,
                        r_nongeneric: verdict.r_nongeneric == Some(true),
                        magnitudes: verdict.magnitudes,
                    })
                })
                .collect()
        })
        .collect();

    let mut samples = Vec::with_capacity(3 * n_samples);
    for s in per_point {
        samples.extend(s?);
    }
    let mut counts = ClassCounts::default();
    let mut generic = ClassCounts::default();
    let mut r_nongeneric = ClassCounts::default();
    for s in &samples {
        counts.bump(s.constructed);
        if s.generic {
            generic.bump(s.constructed);
        }
        if s.r_nongeneric {
            r_nongeneric.bump(s.constructed);
        }
    }
    Ok(CensusReport {
        schema_version: CENSUS_SCHEMA_VERSION,
        chart: chart.name().to_string(),
        n_samples,
        r,
        tol,
        seed,
        sample_box: bounds,
        generic_fraction: generic.total() as f64 / counts.total() as f64,
        r_nongeneric_count: r_nongeneric.total(),
        counts,
        generic,
        r_nongeneric,
        samples,
    })
}
