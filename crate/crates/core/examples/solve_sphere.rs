//! Minimizes the energy on a sphere with one conical point and a tilted background.

use std::f64::consts::PI;

use singular_toda::fields::{effective_weights, Background, ProblemParams, SingularPoint, WeightMode};
use singular_toda::mesh::{build_surface_mesh, SurfaceKind};
use singular_toda::solver::{el_residual, minimize, SolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let north = [0.0, 0.0, 1.0];
    let mesh = build_surface_mesh(SurfaceKind::ClosedSphere, 4, &[north], 1.0)?;
    let s = SingularPoint { id: 0, position: north, alpha: [-0.5, -0.5] };
    let h = [Background::Affine { constant: 1.0, linear: [0.5, 0.0, 0.0] }, Background::Constant(1.0)];
    let params = ProblemParams::new([PI, PI], vec![s], h)?;
    let w = effective_weights(&mesh, &params, WeightMode::ModelProduct)?;
    let r = minimize(&mesh, &w, &params, &SolveOptions::default())?;
    println!("{}: {} iterations, J = {:.12}, residual = {:.3e}", r.status, r.iterations, r.j_value, r.residual);
    println!("trace strictly decreasing: {}", r.strictly_decreasing());
    println!("independent residual check: {:.3e}", el_residual(&mesh, &w, &params, &r.u)?);
    Ok(())
}
