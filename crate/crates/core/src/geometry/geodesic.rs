use std::io::Write;

use serde::Serialize;

use super::jets::christoffel_jet;
use super::{metric_jet, GeometryError, TangentVector};
use crate::chart::Chart;
use crate::genericity;
use crate::tensor::CausalCharacter;

/// Upper bound on the number of integration steps in one call.
pub const MAX_STEPS: usize = 100_000_000;

#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    /// Evaluate the order-0 genericity magnitude at every recorded sample.
    pub annotate: bool,
    /// Record every `stride`-th step; the first and last samples are always kept.
    pub stride: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            annotate: true,
            stride: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
    pub genericity_magnitude: Option<f64>,
    pub causal_character: CausalCharacter,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rhs_evaluations: usize,
    pub initial_norm: f64,
    pub final_norm: f64,
    /// `max_t |g(ẋ,ẋ)(t) − g(ẋ,ẋ)(0)|` over recorded samples.
    pub max_norm_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicTrace {
    pub samples: Vec<GeodesicSample>,
    pub step: f64,
    /// Set when integration stopped before the end of the time span.
    pub truncated: bool,
    pub truncation_reason: Option<String>,
    pub stats: IntegratorStats,
}

impl GeodesicTrace {
    /// Norm drift relative to `max(1, |g(ẋ,ẋ)(0)|)`.
    pub fn relative_norm_drift(&self) -> f64 {
        self.stats.max_norm_drift / self.stats.initial_norm.abs().max(1.0)
    }

    /// CSV with columns `t, x0…, xdot0…, genericity_magnitude, causal_character`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let n = self.samples.first().map_or(0, |s| s.x.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        header.extend((0..n).map(|i| format!("xdot{i}")));
        header.push("genericity_magnitude".to_string());
        header.push("causal_character".to_string());
        w.write_record(&header)?;
        for s in &self.samples {
            let mut rec = vec![format!("{:?}", s.t)];
            rec.extend(s.x.iter().map(|v| format!("{v:?}")));
            rec.extend(s.xdot.iter().map(|v| format!("{v:?}")));
            rec.push(s.genericity_magnitude.map_or(String::new(), |m| format!("{m:e}")));
            rec.push(s.causal_character.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn acceleration(chart: &Chart, x: &[f64], v: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let n = x.len();
    let mj = metric_jet(chart, x, 1)?;
    let gamma = christoffel_jet(&mj)?;
    Ok((0..n)
        .map(|a| {
            let mut s = 0.0;
            for b in 0..n {
                for c in 0..n {
                    s += gamma.value(&[a, b, c]) * v[b] * v[c];
                }
            }
            -s
        })
        .collect())
}

fn stops_trace(e: &GeometryError) -> bool {
    matches!(
        e,
        GeometryError::OutsideRegion { .. } | GeometryError::Domain(_) | GeometryError::Signature { .. }
    )
}

fn axpy(x: &[f64], h: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + h * b).collect()
}

/// Integrates `ẍ^a + Γ^a_bc ẋ^b ẋ^c = 0` with fixed-step classical RK4 from
/// `x0` over `t_span`. Leaving the chart region (or its smooth domain) ends the
/// trace early with `truncated` set; the samples up to that point are kept.
pub fn geodesic_flow(
    chart: &Chart,
    x0: &TangentVector,
    t_span: (f64, f64),
    step: f64,
    options: FlowOptions,
) -> Result<GeodesicTrace, GeometryError> {
    let (t0, t1) = t_span;
    if !(step > 0.0) || !step.is_finite() {
        return Err(GeometryError::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(GeometryError::InvalidArgument(format!(
            "time span must satisfy t0 < t1, got ({t0}, {t1})"
        )));
    }
    if t0 + step == t0 || t1 + step == t1 {
        return Err(GeometryError::StepUnderflow { step });
    }
    let span = t1 - t0;
    let steps = ((span / step) * (1.0 - 1e-12)).ceil().max(1.0);
    if steps > MAX_STEPS as f64 {
        return Err(GeometryError::StepUnderflow { step });
    }
    let steps = steps as usize;
    let stride = options.stride.max(1);

    let sample = |t: f64, x: &[f64], v: &[f64]| -> Result<(GeodesicSample, f64), GeometryError> {
        let (magnitude, g) = if options.annotate {
            let mj = metric_jet(chart, x, 2)?;
            let r = super::riemann_from_jet(&mj)?;
            let m = genericity::normalized_magnitude(v, mj.base(), &r);
            (Some(m), mj.base().sym().clone())
        } else {
            (None, chart.metric_value(x)?)
        };
        let norm = g.inner(v, v);
        Ok((
            GeodesicSample {
                t,
                x: x.to_vec(),
                xdot: v.to_vec(),
                genericity_magnitude: magnitude,
                causal_character: CausalCharacter::classify(&g, v),
            },
            norm,
        ))
    };

    let mut x = x0.point().to_vec();
    let mut v = x0.components().to_vec();
    let n = x.len();
    // validates the starting point, including region and signature
    metric_jet(chart, &x, 1)?;
    let (first, initial_norm) = sample(t0, &x, &v)?;
    let mut trace = GeodesicTrace {
        samples: vec![first],
        step,
        truncated: false,
        truncation_reason: None,
        stats: IntegratorStats {
            initial_norm,
            final_norm: initial_norm,
            ..Default::default()
        },
    };

    let mut t = t0;
    for i in 0..steps {
        let h = if i + 1 == steps { t1 - t } else { step };
        let stage = |xs: &[f64], vs: &[f64]| acceleration(chart, xs, vs);
        let result = (|| {
            let a1 = stage(&x, &v)?;
            let x2 = axpy(&x, 0.5 * h, &v);
            let v2 = axpy(&v, 0.5 * h, &a1);
            let a2 = stage(&x2, &v2)?;
            let x3 = axpy(&x, 0.5 * h, &v2);
            let v3 = axpy(&v, 0.5 * h, &a2);
            let a3 = stage(&x3, &v3)?;
            let x4 = axpy(&x, h, &v3);
            let v4 = axpy(&v, h, &a3);
            let a4 = stage(&x4, &v4)?;
            let nx: Vec<f64> = (0..n)
                .map(|k| x[k] + h / 6.0 * (v[k] + 2.0 * v2[k] + 2.0 * v3[k] + v4[k]))
                .collect();
            let nv: Vec<f64> = (0..n)
                .map(|k| v[k] + h / 6.0 * (a1[k] + 2.0 * a2[k] + 2.0 * a3[k] + a4[k]))
                .collect();
            if let Some(c) = chart.region_violation(&nx) {
                return Err(GeometryError::OutsideRegion { point: nx, constraint: c });
            }
            Ok((nx, nv))
        })();
        trace.stats.rhs_evaluations += 4;
        let (nx, nv) = match result {
            Ok(s) => s,
            Err(e) if stops_trace(&e) => {
                trace.truncated = true;
                trace.truncation_reason = Some(format!("stopped at t = {t}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        };
        x = nx;
        v = nv;
        t = if i + 1 == steps { t1 } else { t0 + (i + 1) as f64 * step };
        trace.stats.steps += 1;
        if (i + 1) % stride == 0 || i + 1 == steps {
            match sample(t, &x, &v) {
                Ok((s, norm)) => {
                    trace.stats.final_norm = norm;
                    trace.stats.max_norm_drift =
                        trace.stats.max_norm_drift.max((norm - initial_norm).abs());
                    trace.samples.push(s);
                }
                Err(e) if stops_trace(&e) => {
                    trace.truncated = true;
                    trace.truncation_reason = Some(format!("stopped at t = {t}: {e}"));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Sym2;

    fn minkowski() -> Chart {
        Chart::parse("dimension 4\ncoordinates t x y z\ng[0][0]=-1\ng[1][1]=1\ng[2][2]=1\ng[3][3]=1\n").unwrap()
    }

    #[test]
    fn straight_lines_in_flat_space() {
        let c = minkowski();
        let p = [0.1, 0.2, 0.3, 0.4];
        let x = TangentVector::new(&p, &[1.0, 0.5, 0.0, -0.25], &Sym2::minkowski(4)).unwrap();
        let tr = geodesic_flow(&c, &x, (0.0, 1.0), 0.125, FlowOptions::default()).unwrap();
        assert_eq!(tr.samples.len(), 9);
        assert!(!tr.truncated);
        let last = tr.samples.last().unwrap();
        assert_eq!(last.t, 1.0);
        for (a, b) in last.x.iter().zip([1.1, 0.7, 0.3, 0.15]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(last.xdot, vec![1.0, 0.5, 0.0, -0.25]);
        assert!(tr.samples.iter().all(|s| s.genericity_magnitude == Some(0.0)));
    }

    #[test]
    fn exits_region() {
        let c = Chart::parse("dimension 2\ncoordinates t x\ng[0][0]=-1\ng[1][1]=1\nregion x < 0.5\n").unwrap();
        let x = TangentVector::new(&[0.0, 0.0], &[1.0, 1.0], &Sym2::minkowski(2)).unwrap();
        let tr = geodesic_flow(&c, &x, (0.0, 2.0), 0.1, FlowOptions::default()).unwrap();
        assert!(tr.truncated);
        assert!(tr.samples.len() < 8);
        assert!(tr.samples.iter().all(|s| s.x[1] < 0.5));
    }

    #[test]
    fn rejects_bad_steps() {
        let c = minkowski();
        let x = TangentVector::new(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0], &Sym2::minkowski(4)).unwrap();
        assert!(geodesic_flow(&c, &x, (0.0, 1.0), 0.0, FlowOptions::default()).is_err());
        assert!(matches!(
            geodesic_flow(&c, &x, (0.0, 1.0), 1e-300, FlowOptions::default()),
            Err(GeometryError::StepUnderflow { .. })
        ));
    }

    #[test]
    fn csv_columns() {
        let c = minkowski();
        let x = TangentVector::new(&[0.0; 4], &[1.0, 1.0, 0.0, 0.0], &Sym2::minkowski(4)).unwrap();
        let tr = geodesic_flow(&c, &x, (0.0, 0.5), 0.25, FlowOptions::default()).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,x0,x1,x2,x3,xdot0,xdot1,xdot2,xdot3,genericity_magnitude,causal_character"
        );
        assert!(lines.next().unwrap().ends_with(",null"));
    }
}
