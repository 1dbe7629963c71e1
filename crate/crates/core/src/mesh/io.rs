use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use std::collections::HashMap;

use super::{Result, SurfaceKind, SurfaceMesh};

/// Writes `vertices.csv` (id, x, y[, z], area, is_boundary, singular_id) and
/// `triangles.csv` (v0, v1, v2) into `dir`.
pub fn write_mesh_csv(mesh: &SurfaceMesh, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let sphere = mesh.kind() == SurfaceKind::ClosedSphere;
    let owner: HashMap<usize, usize> = mesh.singular_vertices().iter().map(|(&id, &v)| (v, id)).collect();
    let mut w = BufWriter::new(File::create(dir.join("vertices.csv"))?);
    let coords = if sphere { "x,y,z" } else { "x,y" };
    writeln!(w, "id,{coords},area,is_boundary,singular_id")?;
    for (v, p) in mesh.vertices().iter().enumerate() {
        write!(w, "{v},{:.16e},{:.16e}", p[0], p[1])?;
        if sphere {
            write!(w, ",{:.16e}", p[2])?;
        }
        let id = owner.get(&v).map(|id| id.to_string()).unwrap_or_default();
        writeln!(w, ",{:.16e},{},{id}", mesh.vertex_areas()[v], u8::from(mesh.is_boundary(v)))?;
    }
    w.flush()?;
    let mut w = BufWriter::new(File::create(dir.join("triangles.csv"))?);
    writeln!(w, "v0,v1,v2")?;
    for [a, b, c] in mesh.triangles() {
        writeln!(w, "{a},{b},{c}")?;
    }
    w.flush()?;
    Ok(())
}
