//! A line through the disk halving one density below it and another above it.

use singular_toda::diagnostics::mass_split_disk;
use singular_toda::mesh::build_disk;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = build_disk(24, &[], 1.0)?;
    let f1: Vec<f64> = mesh.vertices().iter().map(|p| (-3.0 * p[1]).exp()).collect();
    let f2: Vec<f64> = mesh.vertices().iter().map(|p| (2.0 * p[0] + 0.7 * p[1]).exp()).collect();
    let s = mass_split_disk(&mesh, &f1, &f2)?;
    println!("theta = {:.9}, a = {:.9}", s.theta, s.a);
    println!("f1 below: {:.9}, f2 above: {:.9}", s.mass_below, s.mass_above);
    Ok(())
}
