use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{DiagnosticsError, Result};
use crate::bubbles::{fit_slope, phi_map, BubbleFamily};
use crate::fields::{evaluate, EffectiveWeights, PairField, ProblemParams};
use crate::mesh::SurfaceMesh;

/// A test function with the `rho`-independent parts of its energy.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeMember {
    pub label: String,
    pub lambda: f64,
    pub q: f64,
    /// `log int h~_i e^(u_i) - int u_i` (the average is absent on the disk).
    pub entropy: [f64; 2],
}

impl ProbeMember {
    pub fn from_field(
        mesh: &SurfaceMesh,
        weights: &EffectiveWeights,
        params: &ProblemParams,
        label: impl Into<String>,
        lambda: f64,
        u: &PairField,
    ) -> Result<Self> {
        let e = evaluate(mesh, weights, params, u)?;
        Ok(Self {
            label: label.into(),
            lambda,
            q: e.q,
            entropy: [e.log_integral[0] - e.mean[0], e.log_integral[1] - e.mean[1]],
        })
    }

    /// `J_rho` of the member.
    pub fn energy(&self, rho: [f64; 2]) -> f64 {
        self.q - rho[0] * self.entropy[0] - rho[1] * self.entropy[1]
    }
}

/// `Phi^lambda` along a bubble family, shaped by the regimes of `params`.
pub fn bubble_members(
    mesh: &SurfaceMesh,
    weights: &EffectiveWeights,
    params: &ProblemParams,
    family: &BubbleFamily,
    lambdas: &[f64],
) -> Result<Vec<ProbeMember>> {
    let label = format!("({},{},{:?})", family.x1, family.x2, family.t);
    lambdas
        .par_iter()
        .map(|&lambda| {
            let u = phi_map(mesh, &family.spec(lambda), params)?;
            ProbeMember::from_field(mesh, weights, params, label.clone(), lambda, &u)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Boundedness {
    BoundedBelowEmpirically,
    UnboundedEmpirically,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeficitRow {
    pub lambda: f64,
    /// Minimum of `J_rho` over the members at this `lambda`.
    pub j: f64,
    pub rho: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoVerdict {
    pub rho: [f64; 2],
    pub min_j: f64,
    /// Drop of the running minimum over the last decade of `lambda`.
    pub last_decade_drop: f64,
    /// Slope of the per-lambda minimum against `log lambda`.
    pub slope: f64,
    pub verdict: Boundedness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub rows: Vec<DeficitRow>,
    pub verdicts: Vec<RhoVerdict>,
}

/// Smallest last-decade drop counted as unbounded.
const DROP_LIMIT: f64 = 1.0;

/// Minimum of `J_rho` over the family at each `lambda`, for every `rho` of the
/// grid. The running minimum stabilizing over the last decade of `lambda`
/// (drop below one) counts as bounded below.
pub fn mt_deficit_probe(members: &[ProbeMember], rho_grid: &[[f64; 2]]) -> Result<ProbeReport> {
    let mut lambdas: Vec<f64> = members.iter().map(|m| m.lambda).collect();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    if lambdas.len() < 3 {
        return Err(DiagnosticsError::Probe(format!("need at least 3 scales, got {}", lambdas.len())));
    }
    if rho_grid.is_empty() {
        return Err(DiagnosticsError::Probe("empty rho grid".into()));
    }
    let lmax = *lambdas.last().expect("non-empty");
    let per_rho: Vec<(Vec<DeficitRow>, RhoVerdict)> = rho_grid
        .par_iter()
        .map(|&rho| {
            let mut best: BTreeMap<usize, f64> = BTreeMap::new();
            for m in members {
                let k = lambdas.partition_point(|&l| l < m.lambda);
                let j = m.energy(rho);
                best.entry(k).and_modify(|b| *b = b.min(j)).or_insert(j);
            }
            let rows: Vec<DeficitRow> = best.iter().map(|(&k, &j)| DeficitRow { lambda: lambdas[k], j, rho }).collect();
            let mut running = f64::INFINITY;
            let mut at_decade = f64::INFINITY;
            for r in &rows {
                running = running.min(r.j);
                if r.lambda <= lmax / 10.0 {
                    at_decade = running;
                }
            }
            if !at_decade.is_finite() {
                at_decade = rows[0].j;
            }
            let x: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.j).collect();
            let slope = fit_slope(&x, &y)?;
            let drop = at_decade - running;
            let verdict = if drop < DROP_LIMIT {
                Boundedness::BoundedBelowEmpirically
            } else {
                Boundedness::UnboundedEmpirically
            };
            Ok((rows, RhoVerdict { rho, min_j: running, last_decade_drop: drop, slope, verdict }))
        })
        .collect::<Result<_>>()?;
    let (rows, verdicts): (Vec<Vec<DeficitRow>>, Vec<RhoVerdict>) = per_rho.into_iter().unzip();
    Ok(ProbeReport { rows: rows.into_iter().flatten().collect(), verdicts })
}

/// Deficit curves: `lambda,J,rho1,rho2`.
pub fn write_deficit_csv(report: &ProbeReport, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "lambda,J,rho1,rho2")?;
    for r in &report.rows {
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", r.lambda, r.j, r.rho[0], r.rho[1])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubbles::TSchedule;
    use crate::fields::{effective_weights, SingularPoint, WeightMode};
    use crate::mesh::{build_surface_mesh, SurfaceKind};
    use std::f64::consts::PI;

    const N: [f64; 3] = [0.0, 0.0, 1.0];

    fn members(alpha: [f64; 2], rho_shape: [f64; 2], t: f64) -> Vec<ProbeMember> {
        let mesh = build_surface_mesh(SurfaceKind::ClosedSphere, 4, &[N], 4.0).unwrap();
        let s = SingularPoint { id: 0, position: N, alpha };
        let params = ProblemParams::uniform(rho_shape, vec![s]).unwrap();
        let w = effective_weights(&mesh, &params, WeightMode::ModelProduct).unwrap();
        let family = BubbleFamily { x1: 0, x2: 0, t: TSchedule::Fixed(t) };
        let lambdas: Vec<f64> = (4..=12).map(|k| 2f64.powi(k)).collect();
        bubble_members(&mesh, &w, &params, &family, &lambdas).unwrap()
    }

    #[test]
    fn regular_bubbles_below_and_above_threshold() {
        let f = 4.0 * PI;
        let m = members([0.0, 0.0], [f + 1.0, f + 1.0], 0.0);
        let r = mt_deficit_probe(&m, &[[f - 1.0, f - 1.0], [f + 1.0, 1.0]]).unwrap();
        assert_eq!(r.verdicts[0].verdict, Boundedness::BoundedBelowEmpirically);
        assert_eq!(r.verdicts[1].verdict, Boundedness::UnboundedEmpirically);
        assert!(r.verdicts[1].slope < -1.0);
    }

    #[test]
    fn equal_centre_equal_scale_below_doubled_threshold() {
        // Shaped in the high regime at t = 1/2; probed below 4 pi (2 + alpha_1 + alpha_2).
        let f = 4.0 * PI;
        let m = members([-0.5, -0.5], [1.4 * f, 1.4 * f], 0.5);
        let r = mt_deficit_probe(&m, &[[0.9 * f, 0.9 * f], [1.4 * f, 1.4 * f]]).unwrap();
        assert_eq!(r.verdicts[0].verdict, Boundedness::BoundedBelowEmpirically);
        assert_eq!(r.verdicts[1].verdict, Boundedness::UnboundedEmpirically);
    }

    #[test]
    fn too_few_scales() {
        let m = members([0.0, 0.0], [13.0, 13.0], 0.0);
        assert!(mt_deficit_probe(&m[..2], &[[1.0, 1.0]]).is_err());
    }
}
