//! Centre of mass, concentration scale and join coordinate of two-point bubbles.

use std::f64::consts::PI;

use singular_toda::bubbles::{phi_map, BubbleSpec};
use singular_toda::diagnostics::{join_projection, ConcentrationConfig};
use singular_toda::fields::{effective_weights, ProblemParams, SingularPoint, WeightMode};
use singular_toda::mesh::{build_sphere, SphereGrading};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, s) = ([0.0, 0.0, 1.0], [0.0, 0.0, -1.0]);
    let mesh = build_sphere(4, &[n, s], Some(SphereGrading { ratio: 0.3, min_size: 1e-8 }))?;
    let alpha = [-0.25, -0.25];
    let sing = vec![SingularPoint { id: 0, position: n, alpha }, SingularPoint { id: 1, position: s, alpha }];
    let params = ProblemParams::uniform([4.0 * PI, 4.0 * PI], sing)?;
    let w = effective_weights(&mesh, &params, WeightMode::ModelProduct)?;
    let cfg = ConcentrationConfig::with_delta(0.4);
    for t in [0.0, 0.5, 0.99] {
        for k in [6, 9, 12] {
            let lambda = 2f64.powi(k);
            let u = phi_map(&mesh, &BubbleSpec { x1: 0, x2: 1, t, lambda }, &params)?;
            let j = join_projection(&mesh, &w, &params, &u, &cfg)?;
            println!(
                "t = {t:4}, lambda = {lambda:6}: beta = {:?}, sigma = [{:.4}, {:.4}], t' = {:.3}",
                j.beta, j.sigma[0], j.sigma[1], j.t_prime
            );
        }
    }
    Ok(())
}
