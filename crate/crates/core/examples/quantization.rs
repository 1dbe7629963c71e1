//! Admissible blow-up mass pairs at regular and conical points.

use std::f64::consts::PI;

use singular_toda::diagnostics::{quantization_check, regular_table, BlowUpLocation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = 4.0 * PI;
    for sigma in regular_table().into_iter().chain([[f, f]]) {
        let v = quantization_check(sigma, BlowUpLocation::Regular, 1e-9)?;
        println!("regular {:?}/4pi: admissible {}", sigma.map(|s| s / f), v.admissible);
    }
    let v = quantization_check([0.5 * f, 1.25 * f], BlowUpLocation::Singular([-0.5, -0.25]), 1e-9)?;
    println!("singular (-0.5, -0.25), (0.5, 1.25)/4pi: admissible {}, nearest {:?}", v.admissible, v.nearest);
    Ok(())
}
