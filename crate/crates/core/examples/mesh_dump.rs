//! Builds a graded sphere around two antipodal points and dumps it as CSV.

use singular_toda::mesh::{build_surface_mesh, write_mesh_csv, SurfaceKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "mesh_out".into());
    let mesh = build_surface_mesh(SurfaceKind::ClosedSphere, 3, &[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]], 3.0)?;
    println!(
        "{} vertices, {} triangles, area {:.12}, edges in [{:.3e}, {:.3e}]",
        mesh.num_vertices(),
        mesh.triangles().len(),
        mesh.area(),
        mesh.min_edge(),
        mesh.max_edge()
    );
    std::fs::create_dir_all(&out)?;
    write_mesh_csv(&mesh, out.as_ref())?;
    println!("wrote {out}/vertices.csv and {out}/triangles.csv");
    Ok(())
}
