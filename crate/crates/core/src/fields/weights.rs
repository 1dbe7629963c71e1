use std::collections::BTreeMap;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use super::{FieldError, ProblemParams, Result};
use crate::mesh::{green_function, norm, sub, SurfaceKind, SurfaceMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightMode {
    /// `h exp(-4 pi sum_m alpha_m G_m)` with discrete Green functions (sphere only).
    GreenExact,
    /// `h prod_m d(., p_m)^(2 alpha_m)`.
    ModelProduct,
}

/// Effective weights `h~_i` and the quadrature that integrates `h~_i e^g`.
///
/// Triangles touching a singular vertex with `alpha != 0` are integrated with
/// the exact radial factor `r^(2 alpha)` times the linear interpolant of the
/// smooth remainder; all other triangles use lumped vertex quadrature.
#[derive(Clone, Debug)]
pub struct EffectiveWeights {
    mode: WeightMode,
    htilde: [Vec<f64>; 2],
    local_exponent: BTreeMap<usize, [f64; 2]>,
    normalization: [f64; 2],
    omega: [Vec<f64>; 2],
}

const ANGULAR_NODES: usize = 12;

impl EffectiveWeights {
    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    /// Normalized samples of `h~_i`. At a singular vertex with `alpha < 0`
    /// (resp. `> 0`) the entry is `+inf` (resp. `0`) and is never used.
    pub fn htilde(&self, i: usize) -> &[f64] {
        &self.htilde[i]
    }

    /// Singular vertex -> `[2 alpha_1m, 2 alpha_2m]`.
    pub fn local_exponent(&self) -> &BTreeMap<usize, [f64; 2]> {
        &self.local_exponent
    }

    /// Integral of the unnormalized weight; `h~_i = raw / normalization[i]`.
    pub fn normalization(&self) -> [f64; 2] {
        self.normalization
    }

    /// Quadrature weights with `sum = 1`: `int h~_i e^g = sum_v omega_v e^(g_v)`.
    pub fn omega(&self, i: usize) -> &[f64] {
        &self.omega[i]
    }

    pub fn num_vertices(&self) -> usize {
        self.omega[0].len()
    }
}

/// Builds normalized effective weights for both components.
pub fn effective_weights(mesh: &SurfaceMesh, params: &ProblemParams, mode: WeightMode) -> Result<EffectiveWeights> {
    params.validate()?;
    if mode == WeightMode::GreenExact && mesh.kind() != SurfaceKind::ClosedSphere {
        return Err(FieldError::GreenOnDisk);
    }
    let n = mesh.num_vertices();
    let singular: Vec<(usize, [f64; 2])> =
        params.singulars.iter().map(|s| Ok((mesh.singular_vertex(s.id)?, s.alpha))).collect::<Result<_>>()?;

    let greens = match mode {
        WeightMode::GreenExact => {
            params.singulars.iter().map(|s| Ok(green_function(mesh, s.id)?.into_inner())).collect::<Result<Vec<_>>>()?
        }
        WeightMode::ModelProduct => Vec::new(),
    };

    let ring = one_rings(mesh, singular.iter().map(|s| s.0));
    let rule = GaussLegendre::new(NonZeroUsize::new(ANGULAR_NODES).expect("nonzero"));
    let mut local_exponent = BTreeMap::new();
    for &(v, a) in &singular {
        local_exponent.insert(v, [2.0 * a[0], 2.0 * a[1]]);
    }

    let mut htilde: [Vec<f64>; 2] = Default::default();
    let mut omega: [Vec<f64>; 2] = Default::default();
    let mut normalization = [0.0; 2];
    for i in 0..2 {
        let h = params.h[i].samples(mesh, i)?;
        let raw: Vec<f64> = (0..n)
            .map(|v| {
                let factor = match mode {
                    WeightMode::ModelProduct => params
                        .singulars
                        .iter()
                        .map(|s| mesh.distance(v, &s.position).powf(2.0 * s.alpha[i]))
                        .product::<f64>(),
                    WeightMode::GreenExact => {
                        let e: f64 = params.singulars.iter().zip(&greens).map(|(s, g)| s.alpha[i] * g[v]).sum();
                        (-4.0 * std::f64::consts::PI * e).exp()
                    }
                };
                h[v] * factor
            })
            .collect();

        // Singular vertices for this component and their smooth factors.
        let active: BTreeMap<usize, f64> =
            singular.iter().filter(|(_, a)| a[i] != 0.0).map(|&(v, a)| (v, a[i])).collect();
        let flat = |a: usize, b: usize| norm(&sub(&mesh.scaled(a), &mesh.scaled(b)));
        let smooth = |v: usize, p: usize, alpha: f64| raw[v] / flat(v, p).powf(2.0 * alpha);
        let at_singular: BTreeMap<usize, f64> = active
            .iter()
            .map(|(&p, &alpha)| {
                let nb = &ring[&p];
                (p, nb.iter().map(|&v| smooth(v, p, alpha)).sum::<f64>() / nb.len() as f64)
            })
            .collect();

        let mut w = vec![0.0; n];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let area = mesh.triangle_area(t);
            let centre = tri.iter().position(|v| active.contains_key(v));
            match centre {
                None => tri.iter().for_each(|&v| w[v] += area / 3.0 * raw[v]),
                Some(k) => {
                    let (p, a, b) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
                    let alpha = active[&p];
                    let [wp, wa, wb] = fan_weights(mesh, [p, a, b], area, alpha, &rule);
                    w[p] += wp * at_singular[&p];
                    w[a] += wa * smooth(a, p, alpha);
                    w[b] += wb * smooth(b, p, alpha);
                }
            }
        }
        let total: f64 = w.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(FieldError::NonFinite("effective weight normalization"));
        }
        normalization[i] = total;
        omega[i] = w.iter().map(|x| x / total).collect();
        htilde[i] = raw
            .iter()
            .enumerate()
            .map(|(v, r)| match active.get(&v) {
                Some(&a) if a < 0.0 => f64::INFINITY,
                Some(_) => 0.0,
                None => r / total,
            })
            .collect();
    }
    Ok(EffectiveWeights { mode, htilde, local_exponent, normalization, omega })
}

/// Vertex weights of `int_T |x - p|^(2 alpha) phi dA` for the P1 hat functions
/// of `T = (p, a, b)`; exact in the radial variable, Gauss-Legendre in the angle.
fn fan_weights(mesh: &SurfaceMesh, [p, a, b]: [usize; 3], area: f64, alpha: f64, rule: &GaussLegendre) -> [f64; 3] {
    let (pp, pa, pb) = (mesh.scaled(p), mesh.scaled(a), mesh.scaled(b));
    let (ea, eb) = (sub(&pa, &pp), sub(&pb, &pp));
    let radial = |t: f64| {
        let e = [0, 1, 2].map(|k| (1.0 - t) * ea[k] + t * eb[k]);
        norm(&e).powf(2.0 * alpha)
    };
    let two_a = 2.0 * alpha;
    let i0 = rule.integrate(0.0, 1.0, radial);
    let i1 = rule.integrate(0.0, 1.0, |t| radial(t) * t);
    let scale = 2.0 * area / (two_a + 3.0);
    [2.0 * area * (1.0 / (two_a + 2.0) - 1.0 / (two_a + 3.0)) * i0, scale * (i0 - i1), scale * i1]
}

fn one_rings(mesh: &SurfaceMesh, centres: impl Iterator<Item = usize>) -> BTreeMap<usize, Vec<usize>> {
    let mut rings: BTreeMap<usize, Vec<usize>> = centres.map(|c| (c, Vec::new())).collect();
    for tri in mesh.triangles() {
        for &v in tri {
            if let Some(r) = rings.get_mut(&v) {
                r.extend(tri.iter().filter(|&&w| w != v));
            }
        }
    }
    for r in rings.values_mut() {
        r.sort_unstable();
        r.dedup();
    }
    rings
}

#[cfg(test)]
mod tests {
    use super::super::{ProblemParams, SingularPoint};
    use super::*;
    use crate::mesh::build_surface_mesh;
    use std::f64::consts::PI;

    #[test]
    fn regular_weights_are_uniform() {
        let mesh = build_surface_mesh(SurfaceKind::ClosedSphere, 3, &[], 1.0).unwrap();
        let params = ProblemParams::uniform([1.0, 1.0], vec![]).unwrap();
        let w = effective_weights(&mesh, &params, WeightMode::ModelProduct).unwrap();
        assert!(w.htilde(0).iter().all(|&h| (h - 1.0).abs() < 1e-12));
        assert!((w.omega(1).iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fan_weights_reduce_to_lumping() {
        let mesh = build_surface_mesh(SurfaceKind::UnitDisk, 4, &[[0.0; 3]], 1.0).unwrap();
        let rule = GaussLegendre::new(NonZeroUsize::new(8).unwrap());
        let t = mesh.triangles()[0];
        let area = mesh.triangle_area(0);
        let w = fan_weights(&mesh, t, area, 0.0, &rule);
        for x in w {
            assert!((x - area / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn disk_inverse_distance_integral() {
        let origin = [0.0; 3];
        let mesh = build_surface_mesh(SurfaceKind::UnitDisk, 32, &[origin], 2.0).unwrap();
        let s = SingularPoint { id: 0, position: origin, alpha: [-0.5, -0.5] };
        let params = ProblemParams::uniform([1.0, 1.0], vec![s]).unwrap();
        let w = effective_weights(&mesh, &params, WeightMode::ModelProduct).unwrap();
        let c = w.normalization()[0];
        assert!((c - 2.0 * PI).abs() / (2.0 * PI) < 5e-3, "integral {c}");
    }

    #[test]
    fn green_on_disk_rejected() {
        let mesh = build_surface_mesh(SurfaceKind::UnitDisk, 4, &[], 1.0).unwrap();
        let params = ProblemParams::uniform([1.0, 1.0], vec![]).unwrap();
        assert!(matches!(effective_weights(&mesh, &params, WeightMode::GreenExact), Err(FieldError::GreenOnDisk)));
    }
}
