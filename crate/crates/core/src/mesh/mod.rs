//! Triangulated unit sphere (area normalized to one) and unit disk, with
//! cotangent stiffness, lumped mass, Poisson solves and Green functions.

mod disk;
mod green;
mod icosphere;
mod io;
mod linalg;
mod refine;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sprs::CsMat;
use thiserror::Error;

pub use disk::DiskRings;
pub use green::green_function;
pub use io::write_mesh_csv;
pub use linalg::PoissonFactor;

/// A point of the surface. Sphere points are unit vectors, disk points have `z = 0`.
pub type Point = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceKind {
    ClosedSphere,
    UnitDisk,
}

/// Linear constraint selecting a unique representative of a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gauge {
    /// Zero area-weighted mean; the closed-surface gauge.
    ZeroMean,
    /// Zero on boundary vertices; the disk gauge.
    Dirichlet,
}

impl SurfaceKind {
    pub fn natural_gauge(self) -> Gauge {
        match self {
            SurfaceKind::ClosedSphere => Gauge::ZeroMean,
            SurfaceKind::UnitDisk => Gauge::Dirichlet,
        }
    }
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("resolution must be at least {min}, got {got}")]
    Resolution { min: usize, got: usize },
    #[error("grading must be a finite number >= 1, got {0}")]
    Grading(f64),
    #[error("singular points {a} and {b} coincide")]
    Coincident { a: usize, b: usize },
    #[error("singular point {id} snaps onto the vertex already holding point {other}")]
    SnapCollision { id: usize, other: usize },
    #[error("snapping singular point {id} moves it by {moved:.3e}, more than the local edge length {edge:.3e}")]
    SnapTooFar { id: usize, moved: f64, edge: f64 },
    #[error("snapping singular point {id} inverts an adjacent triangle")]
    SnapInverts { id: usize },
    #[error("singular points {a} and {b} share a mesh edge; raise the resolution")]
    Unseparated { a: usize, b: usize },
    #[error("the disk accepts at most one singular point and it must be the origin")]
    DiskSingular,
    #[error("point {0:?} does not lie on the surface")]
    OffSurface(Point),
    #[error("right-hand side has mean {0:.3e}; a closed surface needs zero mean")]
    IncompatibleRhs(f64),
    #[error("gauge {gauge:?} cannot be used on {kind:?}")]
    GaugeMismatch { gauge: Gauge, kind: SurfaceKind },
    #[error("linear solve failed: {reason} (pivot ratio {pivot_ratio:.3e})")]
    SolveFailed { reason: String, pivot_ratio: f64 },
    #[error("field has {got} values but the mesh has {expected} vertices")]
    Length { expected: usize, got: usize },
    #[error("singular point {0} is not registered on this mesh")]
    UnknownSingular(usize),
    #[error("Green functions are only defined on the closed sphere")]
    GreenOnDisk,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = MeshError> = std::result::Result<T, E>;

/// One value per mesh vertex.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self { values: vec![c; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }
}

impl std::ops::Deref for ScalarField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl std::ops::DerefMut for ScalarField {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

impl From<Vec<f64>> for ScalarField {
    fn from(values: Vec<f64>) -> Self {
        Self { values }
    }
}

/// Local refinement around singular vertices of the sphere: edges are split
/// until they are shorter than `ratio` times their distance to the nearest
/// singular point, but never below `min_size` (both in normalized units).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereGrading {
    pub ratio: f64,
    pub min_size: f64,
}

impl SphereGrading {
    /// Grading `g > 1` maps to `ratio = 1/g` and `min_size = base_edge / g^4`,
    /// so `g -> 1` degenerates continuously to no refinement.
    pub fn from_factor(g: f64, base_edge: f64) -> Option<Self> {
        (g > 1.0).then(|| Self { ratio: 1.0 / g, min_size: base_edge / g.powi(4) })
    }
}

/// Immutable triangulated surface.
#[derive(Debug)]
pub struct SurfaceMesh {
    kind: SurfaceKind,
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    stiffness: CsMat<f64>,
    vertex_areas: Vec<f64>,
    boundary: Vec<usize>,
    singular_vertices: BTreeMap<usize, usize>,
    /// Converts stored coordinates to normalized lengths for flat triangle geometry.
    length_scale: f64,
    rings: Option<DiskRings>,
    factors: [OnceLock<std::result::Result<PoissonFactor, String>>; 2],
}

/// Normalization factor of sphere distances: a unit sphere rescaled to area one.
pub fn sphere_length_scale() -> f64 {
    1.0 / (4.0 * PI).sqrt()
}

/// Exact distance on the smooth surface: great-circle distance on the sphere
/// (rescaled to area one) or Euclidean distance on the disk.
pub fn geodesic_distance(kind: SurfaceKind, x: &Point, p: &Point) -> f64 {
    match kind {
        SurfaceKind::ClosedSphere => great_circle(x, p) * sphere_length_scale(),
        SurfaceKind::UnitDisk => ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2)).sqrt(),
    }
}

/// Great-circle angle between two unit vectors, stable for small and antipodal angles.
pub fn great_circle(x: &Point, p: &Point) -> f64 {
    let c = cross(x, p);
    norm(&c).atan2(dot(x, p))
}

pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Point, b: &Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn normalize(a: &Point) -> Point {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Validates that `p` lies on the surface of the given kind.
pub fn check_on_surface(kind: SurfaceKind, p: &Point) -> Result<()> {
    let ok = match kind {
        SurfaceKind::ClosedSphere => (norm(p) - 1.0).abs() < 1e-9,
        SurfaceKind::UnitDisk => p[2] == 0.0 && p[0].hypot(p[1]) <= 1.0 + 1e-12,
    };
    if ok && p.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(MeshError::OffSurface(*p))
    }
}

/// Builds a sphere (`resolution` = icosahedral subdivision level) or a disk
/// (`resolution` = number of rings). On the sphere `grading > 1` switches on
/// local refinement around the singular points, see [`SphereGrading::from_factor`].
pub fn build_surface_mesh(
    kind: SurfaceKind,
    resolution: usize,
    singular_positions: &[Point],
    grading: f64,
) -> Result<SurfaceMesh> {
    if !(grading.is_finite() && grading >= 1.0) {
        return Err(MeshError::Grading(grading));
    }
    match kind {
        SurfaceKind::ClosedSphere => {
            let base = icosphere::base_edge(resolution);
            build_sphere(resolution, singular_positions, SphereGrading::from_factor(grading, base))
        }
        SurfaceKind::UnitDisk => build_disk(resolution, singular_positions, grading),
    }
}

/// Sphere with explicit control of the local refinement.
pub fn build_sphere(level: usize, singular_positions: &[Point], grading: Option<SphereGrading>) -> Result<SurfaceMesh> {
    if level < 1 {
        return Err(MeshError::Resolution { min: 1, got: level });
    }
    for p in singular_positions {
        check_on_surface(SurfaceKind::ClosedSphere, p)?;
    }
    check_distinct(SurfaceKind::ClosedSphere, singular_positions)?;
    let (mut vertices, mut triangles) = icosphere::icosphere(level);
    let singular = icosphere::place_singular(&mut vertices, &triangles, singular_positions)?;
    if let Some(g) = grading {
        let targets: Vec<Point> = singular.values().map(|&v| vertices[v]).collect();
        let scale = sphere_length_scale();
        refine::refine_towards(&mut vertices, &mut triangles, &targets, g.ratio, g.min_size / scale);
    }
    let mesh = SurfaceMesh::assemble(SurfaceKind::ClosedSphere, vertices, triangles, Vec::new(), singular, None);
    mesh.check_separation()?;
    Ok(mesh)
}

/// Disk with `rings` radially graded rings at radii `(k/rings)^grading`.
pub fn build_disk(rings: usize, singular_positions: &[Point], grading: f64) -> Result<SurfaceMesh> {
    if rings < 3 {
        return Err(MeshError::Resolution { min: 3, got: rings });
    }
    if !(grading.is_finite() && grading >= 1.0) {
        return Err(MeshError::Grading(grading));
    }
    match singular_positions {
        [] => {}
        [p] if p[0] == 0.0 && p[1] == 0.0 && p[2] == 0.0 => {}
        _ => return Err(MeshError::DiskSingular),
    }
    let (vertices, triangles, ring_info) = disk::ring_mesh(rings, grading);
    let boundary = ring_info.ring(rings).collect();
    let singular = singular_positions.iter().enumerate().map(|(id, _)| (id, 0usize)).collect();
    Ok(SurfaceMesh::assemble(SurfaceKind::UnitDisk, vertices, triangles, boundary, singular, Some(ring_info)))
}

/// Typical edge length (normalized units) of an ungraded mesh at `resolution`.
pub fn nominal_edge(kind: SurfaceKind, resolution: usize) -> f64 {
    match kind {
        SurfaceKind::ClosedSphere => icosphere::base_edge(resolution),
        SurfaceKind::UnitDisk => 1.0 / resolution.max(1) as f64,
    }
}

/// Default disk grading: `max(1, 1/(1 + min alpha))`.
pub fn default_disk_grading(alphas: &[f64]) -> f64 {
    let min = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    if min.is_finite() && min > -1.0 {
        (1.0 / (1.0 + min)).max(1.0)
    } else {
        1.0
    }
}

fn check_distinct(kind: SurfaceKind, points: &[Point]) -> Result<()> {
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            if geodesic_distance(kind, &points[a], &points[b]) < 1e-12 {
                return Err(MeshError::Coincident { a, b });
            }
        }
    }
    Ok(())
}

impl SurfaceMesh {
    fn assemble(
        kind: SurfaceKind,
        vertices: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        boundary: Vec<usize>,
        singular_vertices: BTreeMap<usize, usize>,
        rings: Option<DiskRings>,
    ) -> Self {
        for t in &mut triangles {
            if oriented_area(kind, &vertices, t) < 0.0 {
                t.swap(1, 2);
            }
        }
        let raw_total: f64 = triangles.iter().map(|t| flat_area(&vertices, t)).sum();
        let length_scale = match kind {
            SurfaceKind::ClosedSphere => 1.0 / raw_total.sqrt(),
            SurfaceKind::UnitDisk => 1.0,
        };
        let area_scale = length_scale * length_scale;
        let mut vertex_areas = vec![0.0; vertices.len()];
        for t in &triangles {
            let a = flat_area(&vertices, t) * area_scale / 3.0;
            for &v in t {
                vertex_areas[v] += a;
            }
        }
        let stiffness = linalg::cotangent_stiffness(&vertices, &triangles);
        Self {
            kind,
            vertices,
            triangles,
            stiffness,
            vertex_areas,
            boundary,
            singular_vertices,
            length_scale,
            rings,
            factors: [OnceLock::new(), OnceLock::new()],
        }
    }

    fn check_separation(&self) -> Result<()> {
        let owner: BTreeMap<usize, usize> = self.singular_vertices.iter().map(|(&id, &v)| (v, id)).collect();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if let (Some(&ia), Some(&ib)) = (owner.get(&a), owner.get(&b)) {
                    return Err(MeshError::Unseparated { a: ia.min(ib), b: ia.max(ib) });
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn stiffness(&self) -> &CsMat<f64> {
        &self.stiffness
    }

    pub fn vertex_areas(&self) -> &[f64] {
        &self.vertex_areas
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary.binary_search(&v).is_ok()
    }

    pub fn singular_vertices(&self) -> &BTreeMap<usize, usize> {
        &self.singular_vertices
    }

    pub fn singular_vertex(&self, id: usize) -> Result<usize> {
        self.singular_vertices.get(&id).copied().ok_or(MeshError::UnknownSingular(id))
    }

    pub fn rings(&self) -> Option<&DiskRings> {
        self.rings.as_ref()
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn natural_gauge(&self) -> Gauge {
        self.kind.natural_gauge()
    }

    /// Total area (one on the sphere, about pi on the disk).
    pub fn area(&self) -> f64 {
        self.vertex_areas.iter().sum()
    }

    /// Exact surface distance from vertex `v` to `p`.
    pub fn distance(&self, v: usize, p: &Point) -> f64 {
        geodesic_distance(self.kind, &self.vertices[v], p)
    }

    /// Vertex positions in normalized flat coordinates, used for triangle geometry.
    pub(crate) fn scaled(&self, v: usize) -> Point {
        let p = self.vertices[v];
        let s = self.length_scale;
        [p[0] * s, p[1] * s, p[2] * s]
    }

    /// Area of triangle `t` in normalized units.
    pub fn triangle_area(&self, t: usize) -> f64 {
        flat_area(&self.vertices, &self.triangles[t]) * self.length_scale * self.length_scale
    }

    /// Longest edge among triangles, in normalized units.
    pub fn max_edge(&self) -> f64 {
        self.edge_lengths().fold(0.0, f64::max)
    }

    /// Shortest edge among triangles, in normalized units.
    pub fn min_edge(&self) -> f64 {
        self.edge_lengths().fold(f64::INFINITY, f64::min)
    }

    fn edge_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.triangles.iter().flat_map(move |t| {
            (0..3).map(move |k| norm(&sub(&self.vertices[t[k]], &self.vertices[t[(k + 1) % 3]])) * self.length_scale)
        })
    }

    /// `S x` for the stiffness matrix `S`.
    pub fn apply_stiffness(&self, x: &[f64]) -> Vec<f64> {
        linalg::matvec(&self.stiffness, x)
    }

    /// The bilinear form `x^T S y`.
    pub fn stiffness_form(&self, x: &[f64], y: &[f64]) -> f64 {
        linalg::matvec(&self.stiffness, y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Area-weighted integral of a vertex field.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.vertex_areas.iter().zip(f).map(|(a, x)| a * x).sum()
    }

    /// Area-weighted mean of a vertex field.
    pub fn mean(&self, f: &[f64]) -> f64 {
        self.integrate(f) / self.area()
    }

    /// Projects a field in place onto the gauge subspace.
    pub fn project_gauge(&self, f: &mut [f64], gauge: Gauge) {
        match gauge {
            Gauge::ZeroMean => {
                let m = self.mean(f);
                f.iter_mut().for_each(|x| *x -= m);
            }
            Gauge::Dirichlet => {
                for &b in &self.boundary {
                    f[b] = 0.0;
                }
            }
        }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if n == self.vertices.len() {
            Ok(())
        } else {
            Err(MeshError::Length { expected: self.vertices.len(), got: n })
        }
    }

    fn check_gauge(&self, gauge: Gauge) -> Result<()> {
        match (self.kind, gauge) {
            (SurfaceKind::ClosedSphere, Gauge::ZeroMean) | (SurfaceKind::UnitDisk, Gauge::Dirichlet) => Ok(()),
            (kind, gauge) => Err(MeshError::GaugeMismatch { gauge, kind }),
        }
    }

    /// Cached factorization of the stiffness matrix restricted to the gauge subspace.
    pub fn factor(&self, gauge: Gauge) -> Result<&PoissonFactor> {
        self.check_gauge(gauge)?;
        let slot = match gauge {
            Gauge::ZeroMean => &self.factors[0],
            Gauge::Dirichlet => &self.factors[1],
        };
        slot.get_or_init(|| PoissonFactor::new(self, gauge).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|reason| MeshError::SolveFailed { reason: reason.clone(), pivot_ratio: f64::NAN })
    }

    /// Solves `S u = load` in the gauge subspace; `load` is a load vector (already
    /// multiplied by the mass), not a density.
    pub fn solve_load(&self, load: &[f64], gauge: Gauge) -> Result<Vec<f64>> {
        self.check_len(load.len())?;
        self.factor(gauge)?.solve(self, load)
    }
}

/// Weak solution of `-Δu = rhs` with lumped load.
pub fn solve_poisson(mesh: &SurfaceMesh, rhs: &ScalarField, gauge: Gauge) -> Result<ScalarField> {
    mesh.check_len(rhs.len())?;
    mesh.check_gauge(gauge)?;
    if gauge == Gauge::ZeroMean {
        let total = mesh.integrate(rhs);
        let scale: f64 = mesh.vertex_areas.iter().zip(rhs.iter()).map(|(a, r)| a * r.abs()).sum();
        if total.abs() > 1e-10 * scale.max(1e-300) && total.abs() > 1e-14 {
            return Err(MeshError::IncompatibleRhs(total));
        }
    }
    let mut load: Vec<f64> = mesh.vertex_areas.iter().zip(rhs.iter()).map(|(a, r)| a * r).collect();
    if gauge == Gauge::ZeroMean {
        // Remove the round-off part of the mean so the system is exactly consistent.
        let s: f64 = load.iter().sum();
        for (l, a) in load.iter_mut().zip(&mesh.vertex_areas) {
            *l -= s * a;
        }
    }
    mesh.solve_load(&load, gauge).map(ScalarField::new)
}

fn flat_area(vertices: &[Point], t: &[usize; 3]) -> f64 {
    let e1 = sub(&vertices[t[1]], &vertices[t[0]]);
    let e2 = sub(&vertices[t[2]], &vertices[t[0]]);
    0.5 * norm(&cross(&e1, &e2))
}

fn oriented_area(kind: SurfaceKind, vertices: &[Point], t: &[usize; 3]) -> f64 {
    let e1 = sub(&vertices[t[1]], &vertices[t[0]]);
    let e2 = sub(&vertices[t[2]], &vertices[t[0]]);
    let n = cross(&e1, &e2);
    match kind {
        // Outward normal: the centroid direction.
        SurfaceKind::ClosedSphere => {
            let c = [
                vertices[t[0]][0] + vertices[t[1]][0] + vertices[t[2]][0],
                vertices[t[0]][1] + vertices[t[1]][1] + vertices[t[2]][1],
                vertices[t[0]][2] + vertices[t[1]][2] + vertices[t[2]][2],
            ];
            0.5 * dot(&n, &c).signum() * norm(&n)
        }
        SurfaceKind::UnitDisk => 0.5 * n[2],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts_and_area() {
        let m = build_surface_mesh(SurfaceKind::ClosedSphere, 3, &[], 1.0).unwrap();
        assert_eq!(m.num_vertices(), 642);
        assert_eq!(m.triangles().len(), 1280);
        assert!((m.area() - 1.0).abs() < 1e-12);
        assert!(m.boundary().is_empty());
    }

    #[test]
    fn poles_are_exact_vertices() {
        let n = [0.0, 0.0, 1.0];
        let s = [0.0, 0.0, -1.0];
        let m = build_surface_mesh(SurfaceKind::ClosedSphere, 4, &[n, s], 1.0).unwrap();
        assert_eq!(m.vertices()[m.singular_vertex(0).unwrap()], n);
        assert_eq!(m.vertices()[m.singular_vertex(1).unwrap()], s);
    }

    #[test]
    fn stiffness_rows_sum_to_zero_and_symmetric() {
        let m = build_surface_mesh(SurfaceKind::ClosedSphere, 2, &[], 1.0).unwrap();
        let ones = vec![1.0; m.num_vertices()];
        assert!(m.apply_stiffness(&ones).iter().all(|r| r.abs() < 1e-12));
        let s = m.stiffness();
        for (i, row) in s.outer_iterator().enumerate() {
            for (j, &v) in row.iter() {
                assert!((s.get(j, i).copied().unwrap() - v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn geodesic_distances() {
        let a = [1.0, 0.0, 0.0];
        assert_eq!(geodesic_distance(SurfaceKind::ClosedSphere, &a, &a), 0.0);
        assert!((great_circle(&a, &[-1.0, 0.0, 0.0]) - PI).abs() < 1e-15);
        let d = geodesic_distance(SurfaceKind::UnitDisk, &[0.3, 0.0, 0.0], &[0.0; 3]);
        assert!((d - 0.3).abs() < 1e-16);
    }

    #[test]
    fn disk_rejects_off_center_singularity() {
        let r = build_surface_mesh(SurfaceKind::UnitDisk, 8, &[[0.1, 0.0, 0.0]], 1.0);
        assert!(matches!(r, Err(MeshError::DiskSingular)));
    }

    #[test]
    fn coincident_points_rejected() {
        let p = [0.0, 0.0, 1.0];
        let r = build_surface_mesh(SurfaceKind::ClosedSphere, 2, &[p, p], 1.0);
        assert!(matches!(r, Err(MeshError::Coincident { .. })));
    }
}
