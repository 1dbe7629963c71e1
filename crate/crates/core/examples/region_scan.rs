//! Classifies one parameter point and scans the disk parameter plane, writing CSV and SVG.

use std::f64::consts::PI;
use std::fs::File;

use singular_toda::regions::{classify, scan_regions, write_region_csv, write_region_svg, Configuration, ScanGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sphere = Configuration::antipodal_sphere([-0.5, 0.0], [0.0, -0.5]);
    let report = classify(&sphere, [5.0 * PI, 1.5 * PI])?;
    println!("{}", serde_json::to_string_pretty(&report)?);

    let disk = Configuration::disk([0.0, 0.0]);
    let map = scan_regions(&disk, ScanGrid::square(0.0, 12.0 * PI, 60))?;
    println!("non-existence components: {}", map.nonexistence_components);
    write_region_csv(&map, File::create("disk_regions.csv")?)?;
    std::fs::write("disk_regions.svg", write_region_svg(&map))?;
    println!("wrote disk_regions.csv and disk_regions.svg");
    Ok(())
}
