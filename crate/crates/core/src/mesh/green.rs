use super::{Gauge, MeshError, Result, ScalarField, SurfaceKind, SurfaceMesh};

/// Discrete Green function of the sphere: the zero-mean solution of
/// `-Δ G = δ_p - 1` with the Dirac mass lumped at the singular vertex.
pub fn green_function(mesh: &SurfaceMesh, singular_id: usize) -> Result<ScalarField> {
    if mesh.kind() != SurfaceKind::ClosedSphere {
        return Err(MeshError::GreenOnDisk);
    }
    let p = mesh.singular_vertex(singular_id)?;
    let mut load: Vec<f64> = mesh.vertex_areas().iter().map(|a| -a / mesh.area()).collect();
    load[p] += 1.0;
    mesh.solve_load(&load, Gauge::ZeroMean).map(ScalarField::new)
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use std::f64::consts::PI;

    #[test]
    fn logarithmic_singularity() {
        let p = [0.0, 0.0, 1.0];
        let mesh = build_surface_mesh(SurfaceKind::ClosedSphere, 4, &[p], 1.0).unwrap();
        let g = green_function(&mesh, 0).unwrap();
        assert!(mesh.mean(&g).abs() < 1e-12);
        // Away from p, G + log(d)/(2 pi) is smooth; compare two far vertices of
        // equal distance with the exact sphere Green function.
        let exact = |d: f64| {
            let theta = d / sphere_length_scale();
            -(1.0 / (4.0 * PI)) * (1.0 - theta.cos()).ln()
        };
        let far: Vec<usize> = (0..mesh.num_vertices()).filter(|&v| mesh.distance(v, &p) > 0.2).collect();
        let offset = far.iter().map(|&v| g[v] - exact(mesh.distance(v, &p))).sum::<f64>() / far.len() as f64;
        let err = far.iter().map(|&v| (g[v] - exact(mesh.distance(v, &p)) - offset).abs()).fold(0.0, f64::max);
        assert!(err < 2e-3, "max deviation {err}");
    }
}
