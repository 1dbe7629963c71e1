use serde::Serialize;

use super::{minimize, Init, Result, SolveOptions, SolverError};
use crate::fields::{EffectiveWeights, ProblemParams};
use crate::mesh::SurfaceMesh;

#[derive(Clone, Debug, Serialize)]
pub struct PathPoint {
    pub rho: [f64; 2],
    pub converged: bool,
    pub iterations: usize,
    pub j_value: f64,
    pub residual: f64,
    /// `max(|u1|, |u2|)` at the returned iterate.
    pub max_norm: f64,
    pub status: String,
}

/// Solves along `path`, warm-starting each point from the previous solution.
/// Stops after the first point that fails to converge.
pub fn continuation_path(
    mesh: &SurfaceMesh,
    weights: &EffectiveWeights,
    params: &ProblemParams,
    path: &[[f64; 2]],
    opts: &SolveOptions,
) -> Result<Vec<PathPoint>> {
    let mut out = Vec::with_capacity(path.len());
    let mut init = match &opts.init {
        Init::WarmStart => Init::Zero,
        other => other.clone(),
    };
    for &rho in path {
        let p = params.with_rho(rho);
        p.validate()?;
        let run = SolveOptions { init: init.clone(), ..opts.clone() };
        let point = match minimize(mesh, weights, &p, &run) {
            Ok(r) => {
                let point = PathPoint {
                    rho,
                    converged: r.converged,
                    iterations: r.iterations,
                    j_value: r.j_value,
                    residual: r.residual,
                    max_norm: r.u.max_abs(),
                    status: r.status.clone(),
                };
                init = Init::Field(r.u);
                point
            }
            Err(SolverError::NonFinite { iteration, iterate }) => PathPoint {
                rho,
                converged: false,
                iterations: iteration,
                j_value: f64::NAN,
                residual: f64::NAN,
                max_norm: iterate.max_abs(),
                status: format!("non-finite energy at iteration {iteration}"),
            },
            Err(e) => return Err(e),
        };
        let stop = !point.converged;
        out.push(point);
        if stop {
            break;
        }
    }
    Ok(out)
}

/// Ratio of the largest to the first max-norm along a path.
pub fn max_norm_growth(points: &[PathPoint]) -> f64 {
    let first = points.first().map_or(0.0, |p| p.max_norm);
    let max = points.iter().map(|p| p.max_norm).fold(0.0, f64::max);
    if first > 0.0 {
        max / first
    } else {
        f64::INFINITY
    }
}
