//! Effective weights, the energy and its gradient on a disk with a conical origin.

use singular_toda::fields::{effective_weights, evaluate, PairField, ProblemParams, SingularPoint, WeightMode};
use singular_toda::mesh::{build_disk, default_disk_grading};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alpha = [-0.5, -0.25];
    let mesh = build_disk(32, &[[0.0; 3]], default_disk_grading(&alpha))?;
    let s = SingularPoint { id: 0, position: [0.0; 3], alpha };
    let params = ProblemParams::uniform([3.0, 4.0], vec![s])?;
    let w = effective_weights(&mesh, &params, WeightMode::ModelProduct)?;

    // A bump vanishing on the boundary circle.
    let bump: Vec<f64> = mesh.vertices().iter().map(|p| 1.0 - p[0] * p[0] - p[1] * p[1]).collect();
    let u = PairField::projected(&mesh, bump.clone(), bump.iter().map(|b| -0.5 * b).collect())?;
    let e = evaluate(&mesh, &w, &params, &u)?;
    println!("Q = {:.10}", e.q);
    println!("log int h~ e^u = {:?}", e.log_integral);
    println!("J = {:.10}", e.j);
    println!("gradient mass norm = {:.6e}", e.residual(&mesh));
    Ok(())
}
