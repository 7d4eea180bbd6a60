mod common;

use common::*;
use gclab::experiments::{catalog, catalog_chart};
use gclab::geometry::{geodesic_flow, FlowOptions};

#[test]
fn schwarzschild_circular_orbit() {
    let chart = catalog_chart("schwarzschild").unwrap();
    let (m, r) = (1.0f64, 6.0f64);
    let omega = (m / r.powi(3)).sqrt();
    let p = [0.0, r, std::f64::consts::FRAC_PI_2, 0.0];
    // affine parameter equal to coordinate time along the orbit
    let x = tangent(&chart, &p, &[1.0, 0.0, 0.0, omega]);
    let period = 2.0 * std::f64::consts::PI / omega;
    let options = FlowOptions { annotate: false, stride: 1000 };
    let tr = geodesic_flow(&chart, &x, (0.0, period), 1e-3, options).unwrap();
    assert!(!tr.truncated);
    let drift = tr.samples.iter().fold(0.0f64, |d, s| d.max((s.x[1] - r).abs()));
    assert!(drift <= 1e-6, "{drift:e}");
    let last = tr.samples.last().unwrap();
    assert!((last.x[3] - 2.0 * std::f64::consts::PI).abs() <= 1e-6);
    assert!(tr.relative_norm_drift() <= 1e-10);
}

#[test]
fn eccentric_schwarzschild_orbit_conserves_energy() {
    let chart = catalog_chart("schwarzschild").unwrap();
    let p = [0.0, 10.0, 1.5, 0.0];
    let x = tangent(&chart, &p, &[1.2, 0.05, 0.01, 0.03]);
    let options = FlowOptions { annotate: false, stride: 100 };
    let tr = geodesic_flow(&chart, &x, (0.0, 20.0), 1e-3, options).unwrap();
    let g_tt = |r: f64| -(1.0 - 2.0 / r);
    let energy = |s: &gclab::geometry::GeodesicSample| g_tt(s.x[1]) * s.xdot[0];
    let e0 = energy(&tr.samples[0]);
    for s in &tr.samples {
        assert!((energy(s) - e0).abs() <= 1e-9 * e0.abs());
    }
    assert!(tr.relative_norm_drift() <= 1e-9);
}

#[test]
fn catalog_geodesics_conserve_the_norm() {
    for entry in catalog() {
        let chart = entry.chart();
        let p = chart.reference_point();
        let mut v = vec![0.0; chart.dim()];
        v[0] = 1.0;
        v[1] = 0.1;
        let x = tangent(&chart, &p, &v);
        let options = FlowOptions { annotate: false, stride: 50 };
        let tr = geodesic_flow(&chart, &x, (0.0, 2.0), 1e-2, options).unwrap();
        assert!(!tr.truncated, "{}", entry.id);
        assert!(tr.relative_norm_drift() <= 1e-7, "{}: {:e}", entry.id, tr.relative_norm_drift());
    }
}

#[test]
fn radial_infall_is_truncated_at_the_horizon() {
    let chart = catalog_chart("schwarzschild").unwrap();
    let x = tangent(&chart, &[0.0, 3.0, 1.5, 0.0], &[1.0, -0.5, 0.0, 0.0]);
    let tr = geodesic_flow(&chart, &x, (0.0, 50.0), 1e-2, FlowOptions::default()).unwrap();
    assert!(tr.truncated);
    assert!(tr.truncation_reason.as_deref().unwrap().contains("outside the chart region"));
    assert!(tr.samples.iter().all(|s| s.x[1] > 2.0));
}
