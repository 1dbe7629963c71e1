use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{combine, phi_components, predict, BubbleError, BubbleSpec, Prediction, Regime, Result};
use crate::fields::{j_energy, log_integral, EffectiveWeights, PairField, ProblemParams};
use crate::mesh::SurfaceMesh;
use crate::svg::{Frame, Svg};

/// Minimum number of vertices inside `B_(1/lambda)` for a reliable sample.
const CORE_VERTICES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum TSchedule {
    Fixed(f64),
    /// `t = c / lambda`, keeping `lambda t` fixed.
    InverseLambda(f64),
}

impl TSchedule {
    pub fn at(self, lambda: f64) -> f64 {
        match self {
            TSchedule::Fixed(t) => t,
            TSchedule::InverseLambda(c) => (c / lambda).clamp(0.0, 1.0),
        }
    }

    fn label(self) -> String {
        match self {
            TSchedule::Fixed(t) => format!("{t}"),
            TSchedule::InverseLambda(c) => format!("{c}/lambda"),
        }
    }
}

/// `zeta = (x1, x2, t(lambda))` swept over lambda.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BubbleFamily {
    pub x1: usize,
    pub x2: usize,
    pub t: TSchedule,
}

impl BubbleFamily {
    pub fn spec(&self, lambda: f64) -> BubbleSpec {
        BubbleSpec { x1: self.x1, x2: self.x2, t: self.t.at(lambda), lambda }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaPoint {
    pub lambda: f64,
    pub t: f64,
    pub q: f64,
    pub int_phi: [f64; 2],
    /// `log int h~_i e^(phi_i - phi_j / 2)`.
    pub log_integral: [f64; 2],
    pub j: f64,
    pub core_vertices: usize,
    pub reliable: bool,
    pub prediction: Prediction,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeRow {
    pub regime: String,
    pub t: String,
    pub quantity: String,
    pub fitted_slope: f64,
    pub predicted_slope: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub regime: Regime,
    pub family: BubbleFamily,
    pub points: Vec<LambdaPoint>,
    pub rows: Vec<SlopeRow>,
}

impl AsymptoticReport {
    pub fn row(&self, quantity: &str) -> Option<&SlopeRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }
}

/// Least-squares slope of `y` against `log x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(BubbleError::Fit(format!("need at least 3 points, got {}", x.len().min(y.len()))));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 0.0 {
        return Err(BubbleError::Fit("all lambda values coincide".into()));
    }
    Ok(sxy / sxx)
}

fn core_count(mesh: &SurfaceMesh, spec: &BubbleSpec) -> Result<usize> {
    let r = 1.0 / spec.lambda;
    [spec.x1, spec.x2]
        .iter()
        .map(|&id| {
            let c = mesh.vertices()[mesh.singular_vertex(id)?];
            Ok((0..mesh.num_vertices()).filter(|&v| mesh.distance(v, &c) < r).count())
        })
        .try_fold(usize::MAX, |m, n: Result<usize>| Ok(m.min(n?)))
}

fn evaluate_point(
    mesh: &SurfaceMesh,
    weights: &EffectiveWeights,
    params: &ProblemParams,
    spec: &BubbleSpec,
) -> Result<LambdaPoint> {
    let phi = phi_components(mesh, spec, params)?;
    let [u1, u2] = combine(&phi);
    let log_int = [log_integral(weights, &u1, 0)?, log_integral(weights, &u2, 1)?];
    let u = PairField::projected(mesh, u1, u2)?;
    let core_vertices = core_count(mesh, spec)?;
    Ok(LambdaPoint {
        lambda: spec.lambda,
        t: spec.t,
        q: crate::fields::q_energy(mesh, &u)?,
        int_phi: [mesh.integrate(&phi[0]), mesh.integrate(&phi[1])],
        log_integral: log_int,
        j: j_energy(mesh, weights, params, &u)?,
        core_vertices,
        reliable: core_vertices >= CORE_VERTICES,
        prediction: predict(params, spec)?,
    })
}

/// Evaluates the family on every `lambda` and fits log-lambda slopes of each
/// energy part against the slopes of the closed-form leading terms.
pub fn asymptotic_report(
    mesh: &SurfaceMesh,
    weights: &EffectiveWeights,
    params: &ProblemParams,
    family: &BubbleFamily,
    lambdas: &[f64],
) -> Result<AsymptoticReport> {
    if lambdas.len() < 3 {
        return Err(BubbleError::Fit(format!("need at least 3 lambda values, got {}", lambdas.len())));
    }
    let (lo, hi) = lambdas.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
    if hi < 100.0 * lo {
        return Err(BubbleError::Fit(format!("lambda range [{lo}, {hi}] spans less than two decades")));
    }
    let regimes: Vec<Regime> = lambdas.iter().map(|&l| family.spec(l).validate(params)).collect::<Result<_>>()?;
    if regimes.windows(2).any(|w| w[0] != w[1]) {
        return Err(BubbleError::Fit("family changes regime along the sweep".into()));
    }
    let points: Vec<LambdaPoint> =
        lambdas.par_iter().map(|&l| evaluate_point(mesh, weights, params, &family.spec(l))).collect::<Result<_>>()?;
    let good: Vec<&LambdaPoint> = points.iter().filter(|p| p.reliable).collect();
    if good.len() < 3 {
        return Err(BubbleError::Fit(format!("only {} lambda values resolve the bubble core", good.len())));
    }
    let x: Vec<f64> = good.iter().map(|p| p.lambda).collect();
    let regime = regimes[0];
    let t = family.t.label();
    let mut rows = Vec::new();
    let mut push = |quantity: &str,
                    measured: &dyn Fn(&LambdaPoint) -> f64,
                    predicted: &dyn Fn(&Prediction) -> f64|
     -> Result<()> {
        let fitted = fit_slope(&x, &good.iter().map(|p| measured(p)).collect::<Vec<_>>())?;
        let predicted_slope = fit_slope(&x, &good.iter().map(|p| predicted(&p.prediction)).collect::<Vec<_>>())?;
        let rel_err = if predicted_slope != 0.0 {
            (fitted - predicted_slope).abs() / predicted_slope.abs()
        } else {
            fitted.abs()
        };
        rows.push(SlopeRow {
            regime: regime.symbol().into(),
            t: t.clone(),
            quantity: quantity.into(),
            fitted_slope: fitted,
            predicted_slope,
            rel_err,
        });
        Ok(())
    };
    push("Q", &|p| p.q, &|c| c.q.primary)?;
    if good[0].prediction.q.alternate.is_some() {
        push("Q:alt", &|p| p.q, &|c| c.q.alternate.unwrap_or(c.q.primary))?;
    }
    for i in 0..2 {
        push(&format!("int_phi{}", i + 1), &|p| p.int_phi[i], &|c| c.int_phi[i])?;
        push(&format!("log_int{}", i + 1), &|p| p.log_integral[i], &|c| c.log_integral[i])?;
    }
    push("J", &|p| p.j, &|c| c.j.primary)?;
    if good[0].prediction.j.alternate.is_some() {
        push("J:alt", &|p| p.j, &|c| c.j.alternate.unwrap_or(c.j.primary))?;
    }
    Ok(AsymptoticReport { regime, family: *family, points, rows })
}

/// Slope table: `regime,t,quantity,fitted_slope,predicted_slope,rel_err`.
pub fn write_report_csv<'a>(
    reports: impl IntoIterator<Item = &'a AsymptoticReport>,
    mut out: impl Write,
) -> std::io::Result<()> {
    writeln!(out, "regime,t,quantity,fitted_slope,predicted_slope,rel_err")?;
    for r in reports {
        for row in &r.rows {
            writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{:.16e}",
                row.regime, row.t, row.quantity, row.fitted_slope, row.predicted_slope, row.rel_err
            )?;
        }
    }
    Ok(())
}

/// Per-lambda data behind the slopes (the CSV twin of the SVG).
pub fn write_points_csv<'a>(
    reports: impl IntoIterator<Item = &'a AsymptoticReport>,
    mut out: impl Write,
) -> std::io::Result<()> {
    writeln!(out, "regime,x1,x2,t,lambda,Q,int_phi1,int_phi2,log_int1,log_int2,J,core_vertices,reliable")?;
    for r in reports {
        for p in &r.points {
            writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
                r.regime.symbol(),
                r.family.x1,
                r.family.x2,
                p.t,
                p.lambda,
                p.q,
                p.int_phi[0],
                p.int_phi[1],
                p.log_integral[0],
                p.log_integral[1],
                p.j,
                p.core_vertices,
                p.reliable
            )?;
        }
    }
    Ok(())
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// `J` against `log lambda`, one curve per report.
pub fn write_report_svg(reports: &[AsymptoticReport]) -> String {
    let pts: Vec<(f64, f64)> = reports.iter().flat_map(|r| r.points.iter().map(|p| (p.lambda.ln(), p.j))).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = 0.05 * (y1 - y0).max(1e-9);
    let mut svg = Svg::new(Frame::new([x0, x1.max(x0 + 1e-9)], [y0 - pad, y1 + pad]));
    for (k, r) in reports.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let curve: Vec<(f64, f64)> = r.points.iter().map(|p| (p.lambda.ln(), p.j)).collect();
        svg.polyline(&curve, color, 1.5, false);
        for &(x, y) in &curve {
            svg.circle(x, y, 2.5, color);
        }
        let f = *svg.frame();
        let label = format!("{} x=({},{}) t={}", r.regime.symbol(), r.family.x1, r.family.x2, r.family.t.label());
        svg.text(f.margin + 10.0, f.margin + 16.0 + 14.0 * k as f64, 11.0, "start", &label);
    }
    svg.axes("log lambda", "J", 6);
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_line() {
        let x = [16.0, 64.0, 256.0, 1024.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.ln() - 1.0).collect();
        assert!((fit_slope(&x, &y).unwrap() - 3.0).abs() < 1e-12);
        assert!(fit_slope(&x[..2], &y[..2]).is_err());
    }
}
