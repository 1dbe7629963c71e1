use std::f64::consts::PI;

use serde::Serialize;

use super::{DiagnosticsError, Result};
use crate::mesh::{SurfaceKind, SurfaceMesh};

const MASS_TOL: f64 = 1e-6;
const FIRST_GRID: usize = 64;
const MAX_GRID: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MassSplit {
    pub theta: f64,
    pub a: f64,
    /// `int_{x.theta < a} f_1`.
    pub mass_below: f64,
    /// `int_{x.theta > a} f_2`.
    pub mass_above: f64,
}

/// Integral of the piecewise-linear interpolant of `f` over `{x . (cos theta, sin theta) < a}`.
pub fn half_plane_mass(mesh: &SurfaceMesh, f: &[f64], theta: f64, a: f64) -> f64 {
    let n = [theta.cos(), theta.sin()];
    let pts = mesh.vertices();
    let mut total = 0.0;
    for tri in mesh.triangles() {
        let poly: Vec<([f64; 2], f64)> = tri.iter().map(|&v| ([pts[v][0], pts[v][1]], f[v])).collect();
        let side = |p: &[f64; 2]| p[0] * n[0] + p[1] * n[1] - a;
        if poly.iter().all(|(p, _)| side(p) <= 0.0) {
            total += polygon_integral(&poly);
            continue;
        }
        if poly.iter().all(|(p, _)| side(p) >= 0.0) {
            continue;
        }
        let mut clipped = Vec::with_capacity(4);
        for k in 0..3 {
            let (p, fp) = poly[k];
            let (q, fq) = poly[(k + 1) % 3];
            let (sp, sq) = (side(&p), side(&q));
            if sp <= 0.0 {
                clipped.push((p, fp));
            }
            if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
                let w = sp / (sp - sq);
                clipped.push(([p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1])], fp + w * (fq - fp)));
            }
        }
        total += polygon_integral(&clipped);
    }
    total
}

/// Exact integral of a linear function over a convex polygon, by fan triangulation.
fn polygon_integral(poly: &[([f64; 2], f64)]) -> f64 {
    let (p0, f0) = poly[0];
    poly.windows(2)
        .skip(1)
        .map(|w| {
            let ((p1, f1), (p2, f2)) = (w[0], w[1]);
            let area = 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])).abs();
            area * (f0 + f1 + f2) / 3.0
        })
        .sum()
}

/// The offset `a(theta)` splitting the mass of `f` in half.
fn median(mesh: &SurfaceMesh, f: &[f64], theta: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if half_plane_mass(mesh, f, theta, mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn normalize(mesh: &SurfaceMesh, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != mesh.num_vertices() {
        return Err(DiagnosticsError::Config(format!(
            "{} density values for {} vertices",
            f.len(),
            mesh.num_vertices()
        )));
    }
    if let Some(v) = f.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(DiagnosticsError::BadDensity(v));
    }
    let total = half_plane_mass(mesh, f, 0.0, 2.0);
    if !(total > 0.0) {
        return Err(DiagnosticsError::NotNormalized(total));
    }
    Ok(f.iter().map(|x| x / total).collect())
}

/// A line `x . theta = a` leaving half of `f_1` below and half of `f_2` above.
///
/// `f_1`, `f_2` are vertex densities on the disk mesh, integrated as
/// piecewise-linear functions and normalized to unit mass.
pub fn mass_split_disk(mesh: &SurfaceMesh, f1: &[f64], f2: &[f64]) -> Result<MassSplit> {
    if mesh.kind() != SurfaceKind::UnitDisk {
        return Err(DiagnosticsError::Surface("mass splitting needs the unit disk"));
    }
    let (f1, f2) = (normalize(mesh, f1)?, normalize(mesh, f2)?);
    let gap = |theta: f64| median(mesh, &f1, theta) - median(mesh, &f2, theta);
    let finish = |theta: f64| -> Result<MassSplit> {
        let a = 0.5 * (median(mesh, &f1, theta) + median(mesh, &f2, theta));
        let below = half_plane_mass(mesh, &f1, theta, a);
        let above = 1.0 - half_plane_mass(mesh, &f2, theta, a);
        if (below - 0.5).abs() > MASS_TOL || (above - 0.5).abs() > MASS_TOL {
            return Err(DiagnosticsError::SplitCheck { below, above });
        }
        Ok(MassSplit { theta, a, mass_below: below, mass_above: above })
    };
    let g0 = gap(0.0);
    if g0.abs() < 1e-12 {
        return finish(0.0);
    }
    let mut samples = FIRST_GRID;
    while samples <= MAX_GRID {
        let step = PI / samples as f64;
        let mut prev = (0.0, g0);
        for k in 1..=samples {
            let theta = k as f64 * step;
            let g = gap(theta);
            if g.abs() < 1e-12 {
                return finish(theta);
            }
            if g.signum() != prev.1.signum() {
                let (mut lo, mut hi, glo) = (prev.0, theta, prev.1);
                while hi - lo > 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    if gap(mid).signum() == glo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return finish(0.5 * (lo + hi));
            }
            prev = (theta, g);
        }
        samples *= 4;
    }
    Err(DiagnosticsError::NoSignChange { samples: MAX_GRID })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_disk;

    #[test]
    fn half_plane_mass_of_constant() {
        let mesh = build_disk(24, &[], 1.0).unwrap();
        let f = vec![1.0; mesh.num_vertices()];
        let all = half_plane_mass(&mesh, &f, 0.3, 2.0);
        assert!((half_plane_mass(&mesh, &f, 0.3, 0.0) / all - 0.5).abs() < 1e-3);
        // Circular segment of the inscribed polygon versus the disk: close, not exact.
        let seg = half_plane_mass(&mesh, &f, 1.0, -0.5) / all;
        let exact = (PI / 3.0 - 0.5 * (3f64).sqrt() / 2.0) / PI;
        assert!((seg - exact).abs() < 2e-3, "{seg} {exact}");
    }

    #[test]
    fn uniform_pair_splits_at_centre() {
        let mesh = build_disk(16, &[], 1.0).unwrap();
        let f = vec![1.0; mesh.num_vertices()];
        let s = mass_split_disk(&mesh, &f, &f).unwrap();
        assert_eq!(s.theta, 0.0);
        assert!(s.a.abs() < 1e-3, "{}", s.a);
    }

    #[test]
    fn shifted_mass_split_satisfies_both_conditions() {
        let mesh = build_disk(16, &[], 1.0).unwrap();
        let f1 = vec![1.0; mesh.num_vertices()];
        let f2: Vec<f64> = mesh.vertices().iter().map(|p| (2.0 * p[0] + 0.7 * p[1]).exp()).collect();
        let s = mass_split_disk(&mesh, &f1, &f2).unwrap();
        assert!((s.mass_below - 0.5).abs() < 1e-6 && (s.mass_above - 0.5).abs() < 1e-6);
        assert!(s.a > -1.0 && s.a < 1.0);
    }
}
