//! Dilation identities on converged solutions: the disk identity under refinement and
//! the stereographic identity on the sphere.

use std::f64::consts::PI;

use singular_toda::diagnostics::{pohozaev_disk, stereographic_pohozaev};
use singular_toda::fields::{effective_weights, ProblemParams, SingularPoint, WeightMode};
use singular_toda::mesh::{build_disk, build_sphere, SphereGrading};
use singular_toda::solver::{minimize, SolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let origin = [0.0; 3];
    for rings in [16, 32, 64] {
        let mesh = build_disk(rings, &[origin], 2.0)?;
        let s = SingularPoint { id: 0, position: origin, alpha: [-0.5, -0.5] };
        let params = ProblemParams::uniform([PI, PI], vec![s])?;
        let w = effective_weights(&mesh, &params, WeightMode::ModelProduct)?;
        let r = minimize(&mesh, &w, &params, &SolveOptions::default())?;
        let p = pohozaev_disk(&mesh, &w, &params, &r.u)?;
        println!("disk, {rings:3} rings: lhs {:.6} rhs {:.6} gap {:.2e}", p.lhs, p.rhs, p.relative_gap);
    }

    let (n, s) = ([0.0, 0.0, 1.0], [0.0, 0.0, -1.0]);
    let mesh = build_sphere(4, &[n, s], Some(SphereGrading { ratio: 0.3, min_size: 1e-6 }))?;
    let sing = vec![
        SingularPoint { id: 0, position: n, alpha: [-0.25, -0.25] },
        SingularPoint { id: 1, position: s, alpha: [-0.1, 0.0] },
    ];
    let params = ProblemParams::uniform([2.0 * PI, 1.5 * PI], sing)?;
    let w = effective_weights(&mesh, &params, WeightMode::GreenExact)?;
    let r = minimize(&mesh, &w, &params, &SolveOptions::default())?;
    let p = stereographic_pohozaev(&mesh, &w, &params, &r.u)?;
    println!("sphere: lhs {:.6} rhs {:.6} gap {:.2e}", p.lhs, p.rhs, p.relative_gap);
    for (k, v) in &p.components {
        println!("  {k} = {v:.6}");
    }
    Ok(())
}
