//! Log-lambda slopes of the bubble energy parts against their predicted leading terms.

use std::f64::consts::PI;

use singular_toda::bubbles::{asymptotic_report, BubbleFamily, TSchedule};
use singular_toda::fields::{effective_weights, ProblemParams, SingularPoint, WeightMode};
use singular_toda::mesh::{build_surface_mesh, SurfaceKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let north = [0.0, 0.0, 1.0];
    let mesh = build_surface_mesh(SurfaceKind::ClosedSphere, 5, &[north], 4.0)?;
    let lambdas: Vec<f64> = (4..=12).map(|k| 2f64.powi(k)).collect();
    // (alpha, rho, t): one low-regime and one high-regime family.
    for (alpha, rho, t) in [(-0.5, [3.0 * PI, 3.0 * PI], 0.25), (-0.25, [7.0 * PI, 7.0 * PI], 0.5)] {
        let s = SingularPoint { id: 0, position: north, alpha: [alpha, alpha] };
        let params = ProblemParams::uniform(rho, vec![s])?;
        let w = effective_weights(&mesh, &params, WeightMode::ModelProduct)?;
        let family = BubbleFamily { x1: 0, x2: 0, t: TSchedule::Fixed(t) };
        let r = asymptotic_report(&mesh, &w, &params, &family, &lambdas)?;
        println!("alpha = {alpha}, regime {}", r.regime);
        for row in &r.rows {
            println!(
                "  {:9} fitted {:11.5} predicted {:11.5} rel err {:.4}",
                row.quantity, row.fitted_slope, row.predicted_slope, row.rel_err
            );
        }
    }
    Ok(())
}
