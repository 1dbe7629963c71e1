//! Follows the regular sphere problem along rho_1 toward 4 pi.

use std::f64::consts::PI;

use singular_toda::fields::{effective_weights, Background, ProblemParams, WeightMode};
use singular_toda::mesh::{build_surface_mesh, SurfaceKind};
use singular_toda::solver::{continuation_path, max_norm_growth, Init, SolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = build_surface_mesh(SurfaceKind::ClosedSphere, 3, &[], 1.0)?;
    let h = [Background::Affine { constant: 1.0, linear: [0.0, 0.0, 0.6] }, Background::Constant(1.0)];
    let params = ProblemParams::new([PI, PI], Vec::new(), h)?;
    let w = effective_weights(&mesh, &params, WeightMode::ModelProduct)?;
    let path: Vec<[f64; 2]> = (1..=7).map(|k| [4.0 * PI * (0.5 + 0.07 * k as f64), PI]).collect();
    let opts = SolveOptions { max_iters: 4000, init: Init::WarmStart, ..SolveOptions::default() };
    let points = continuation_path(&mesh, &w, &params, &path, &opts)?;
    for p in &points {
        println!(
            "rho1/4pi = {:.3}  converged {:5}  iterations {:5}  max|u| = {:.4}",
            p.rho[0] / (4.0 * PI),
            p.converged,
            p.iterations,
            p.max_norm
        );
    }
    println!("max-norm growth along the path: {:.3}", max_norm_growth(&points));
    Ok(())
}
