use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{DiagnosticsError, PohozaevReport, Result};
use crate::fields::{log_integral, EffectiveWeights, PairField, ProblemParams, WeightMode};
use crate::mesh::{Gauge, SurfaceKind, SurfaceMesh};

pub(super) fn require_constant_h(params: &ProblemParams) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for (i, h) in params.h.iter().enumerate() {
        if !h.is_constant() {
            return Err(DiagnosticsError::NonConstantBackground);
        }
        out[i] = h.eval(0, &[0.0; 3]);
    }
    Ok(out)
}

/// Dilation identity on the unit disk with the singularity at the origin.
///
/// `lhs = oint (d_nu u1)^2 + d_nu u1 d_nu u2 + (d_nu u2)^2` from one-sided
/// differences on the outer rings, `rhs = sum_i 6 (1 + alpha_i) rho_i - 3 rho_i
/// oint |x|^(2 alpha_i) e^(u_i) / int |x|^(2 alpha_i) e^(u_i)`.
pub fn pohozaev_disk(
    mesh: &SurfaceMesh,
    weights: &EffectiveWeights,
    params: &ProblemParams,
    u: &PairField,
) -> Result<PohozaevReport> {
    if mesh.kind() != SurfaceKind::UnitDisk {
        return Err(DiagnosticsError::Surface("the disk identity needs the unit disk"));
    }
    let rings = mesh.rings().ok_or(DiagnosticsError::Surface("disk mesh without ring structure"))?;
    if u.gauge() != Gauge::Dirichlet || u.len() != mesh.num_vertices() {
        return Err(DiagnosticsError::NotDirichlet(f64::NAN));
    }
    let on_boundary = mesh.boundary().iter().map(|&b| u.u1()[b].abs().max(u.u2()[b].abs())).fold(0.0, f64::max);
    if on_boundary > 1e-12 {
        return Err(DiagnosticsError::NotDirichlet(on_boundary));
    }
    if weights.mode() != WeightMode::ModelProduct {
        return Err(DiagnosticsError::Surface("the disk identity uses model-product weights"));
    }
    let h = require_constant_h(params)?;
    let alpha = match params.singulars.as_slice() {
        [] => [0.0; 2],
        [s] => s.alpha,
        _ => return Err(DiagnosticsError::Singulars("the disk carries at most one singular point".into())),
    };
    let rho = params.rho;

    let d1 = rings.boundary_normal_derivative(u.u1());
    let d2 = rings.boundary_normal_derivative(u.u2());
    let dtheta = 2.0 * PI / d1.len() as f64;
    let flux = |f: &dyn Fn(f64, f64) -> f64| d1.iter().zip(&d2).map(|(a, b)| f(a.1, b.1)).sum::<f64>() * dtheta;
    let f11 = flux(&|a, _| a * a);
    let f12 = flux(&|a, b| a * b);
    let f22 = flux(&|_, b| b * b);
    let lhs = f11 + f12 + f22;

    let mut components = BTreeMap::new();
    let mut rhs = 0.0;
    for i in 0..2 {
        // u = 0 on the circle, so the boundary integral of h |x|^(2 alpha) e^u is 2 pi h.
        let bulk = weights.normalization()[i] * log_integral(weights, u.component(i), i)?.exp();
        let ratio = 2.0 * PI * h[i] / bulk;
        rhs += 6.0 * (1.0 + alpha[i]) * rho[i] - 3.0 * rho[i] * ratio;
        components.insert(format!("boundary_ratio{}", i + 1), ratio);
        components.insert(format!("rho{}", i + 1), rho[i]);
    }
    components.insert("flux_11".into(), f11);
    components.insert("flux_12".into(), f12);
    components.insert("flux_22".into(), f22);
    components.insert("holder_bound".into(), 3.0 * (rho[0] * rho[0] - rho[0] * rho[1] + rho[1] * rho[1]) / (2.0 * PI));
    Ok(PohozaevReport::new(lhs, rhs, components))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{effective_weights, SingularPoint};
    use crate::mesh::build_disk;
    use crate::solver::{minimize, SolveOptions};

    fn solve(rings: usize) -> PohozaevReport {
        let origin = [0.0; 3];
        let mesh = build_disk(rings, &[origin], 2.0).unwrap();
        let s = SingularPoint { id: 0, position: origin, alpha: [-0.5, -0.5] };
        let params = ProblemParams::uniform([PI, PI], vec![s]).unwrap();
        let w = effective_weights(&mesh, &params, WeightMode::ModelProduct).unwrap();
        let r = minimize(&mesh, &w, &params, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        pohozaev_disk(&mesh, &w, &params, &r.u).unwrap()
    }

    #[test]
    fn converged_solution_satisfies_identity() {
        let coarse = solve(32);
        let fine = solve(64);
        assert!(fine.relative_gap < coarse.relative_gap, "{} {}", coarse.relative_gap, fine.relative_gap);
        assert!(fine.relative_gap < 0.02, "{fine:?}");
        assert!(fine.component("holder_bound").unwrap() <= fine.lhs);
    }

    #[test]
    fn rejects_non_dirichlet_field() {
        let mesh = build_disk(8, &[], 1.0).unwrap();
        let params = ProblemParams::uniform([PI, PI], vec![]).unwrap();
        let w = effective_weights(&mesh, &params, WeightMode::ModelProduct).unwrap();
        let u = PairField::new(
            vec![1.0; mesh.num_vertices()].into(),
            vec![0.0; mesh.num_vertices()].into(),
            Gauge::Dirichlet,
        );
        assert!(matches!(pohozaev_disk(&mesh, &w, &params, &u), Err(DiagnosticsError::NotDirichlet(_))));
    }
}
