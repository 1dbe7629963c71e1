//! Empirical boundedness of the energy along bubble families, on both sides of 4 pi.

use std::f64::consts::PI;

use singular_toda::bubbles::{BubbleFamily, TSchedule};
use singular_toda::diagnostics::{bubble_members, mt_deficit_probe};
use singular_toda::fields::{effective_weights, ProblemParams, SingularPoint, WeightMode};
use singular_toda::mesh::{build_surface_mesh, SurfaceKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let north = [0.0, 0.0, 1.0];
    let mesh = build_surface_mesh(SurfaceKind::ClosedSphere, 4, &[north], 4.0)?;
    let f = 4.0 * PI;
    let s = SingularPoint { id: 0, position: north, alpha: [0.0, 0.0] };
    let params = ProblemParams::uniform([f + 1.0, f + 1.0], vec![s])?;
    let w = effective_weights(&mesh, &params, WeightMode::ModelProduct)?;
    let family = BubbleFamily { x1: 0, x2: 0, t: TSchedule::Fixed(0.0) };
    let lambdas: Vec<f64> = (4..=12).map(|k| 2f64.powi(k)).collect();
    let members = bubble_members(&mesh, &w, &params, &family, &lambdas)?;
    let report = mt_deficit_probe(&members, &[[f - 1.0, f - 1.0], [f + 1.0, 1.0]])?;
    for v in &report.verdicts {
        println!("rho = {:?}: min J {:.4}, slope {:.4}, {:?}", v.rho, v.min_j, v.slope, v.verdict);
    }
    Ok(())
}
