//! Built-in charts, random polynomial perturbations and the genericity census.

mod catalog;
mod census;
mod perturb;
mod random;

use thiserror::Error;

use crate::chart::ChartError;
use crate::geometry::GeometryError;

pub use catalog::{catalog, catalog_chart, CatalogEntry};
pub use census::{
    causal_triplet, genericity_census, CensusReport, CensusSample, ClassCounts,
    CENSUS_SCHEMA_VERSION, MAX_REJECTIONS,
};
pub use perturb::{grid_points, perturb_metric, signature_grid_check, PerturbationSpec, GRID_POINTS};
pub use random::{random_curvature, random_lorentzian};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("metric is not Lorentzian at {point:?}: {detail}; use a smaller amplitude")]
    SignatureLoss { point: Vec<f64>, detail: String },
    #[error("{0}")]
    InvalidSpec(String),
    #[error("{0}")]
    Sampling(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{metric_jet, riemann_from_jet};

    #[test]
    fn catalog_charts_are_lorentzian() {
        assert!(catalog().len() >= 6);
        for e in catalog() {
            let c = e.chart();
            assert_eq!(c.name(), e.id);
            let checked = signature_grid_check(&c, c.sample_box(), 5).unwrap();
            assert!(checked > 0, "{}", e.id);
            assert!(c.in_region(&c.reference_point()), "{}", e.id);
        }
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let c = catalog_chart("minkowski4").unwrap();
        assert_eq!(perturb_metric(&c, &PerturbationSpec::new(0.0, 3, 1)).unwrap(), c);
    }

    #[test]
    fn large_amplitude_is_rejected() {
        let c = catalog_chart("minkowski4").unwrap();
        assert!(matches!(
            perturb_metric(&c, &PerturbationSpec::new(10.0, 3, 7)),
            Err(ExperimentError::SignatureLoss { .. })
        ));
    }

    #[test]
    fn perturbed_chart_round_trips_and_curves() {
        let c = catalog_chart("minkowski4").unwrap();
        let p = perturb_metric(&c, &"0.05:3:7".parse().unwrap()).unwrap();
        let again = crate::chart::Chart::parse(&p.to_text()).unwrap();
        let pt = [0.1, -0.2, 0.3, 0.4];
        assert_eq!(p.metric_value(&pt).unwrap(), again.metric_value(&pt).unwrap());
        let r = riemann_from_jet(&metric_jet(&p, &pt, 2).unwrap()).unwrap();
        assert!(r.max_norm() > 1e-4);
    }

    #[test]
    fn spec_parsing() {
        let s: PerturbationSpec = "0.05:3:7".parse().unwrap();
        assert_eq!((s.amplitude, s.degree, s.seed), (0.05, 3, 7));
        assert!("0.05:3".parse::<PerturbationSpec>().is_err());
        assert!("x:3:7".parse::<PerturbationSpec>().is_err());
    }

    #[test]
    fn random_metrics_are_lorentzian() {
        let mut rng = crate::rng::SampleRng::new(3);
        for n in 2..6 {
            for _ in 0..20 {
                let g = random_lorentzian(n, 0.4, &mut rng);
                assert_eq!(g.eigenvalues().iter().filter(|&&e| e < 0.0).count(), 1);
            }
            assert!(random_curvature(n, &mut rng).residual() <= 1e-12);
        }
    }

    #[test]
    fn flat_census() {
        let c = catalog_chart("minkowski4").unwrap();
        let rep = genericity_census(&c, 10, 1, 7, 1e-10, None).unwrap();
        assert_eq!(rep.generic_fraction, 0.0);
        assert_eq!(rep.r_nongeneric_count, 30);
        assert_eq!(rep.counts.null, 10);
        for s in &rep.samples {
            assert_eq!(s.constructed, s.causal_character);
            if s.constructed == crate::tensor::CausalCharacter::Null {
                assert!(s.relative_norm <= 1e-12);
            }
        }
    }
}
