use std::collections::{BTreeMap, HashMap};

use super::{cross, dot, great_circle, norm, normalize, sphere_length_scale, sub, MeshError, Point, Result};

const PHI: f64 = 1.618_033_988_749_895;

/// Approximate edge length of a level-`level` icosphere in normalized units.
pub(super) fn base_edge(level: usize) -> f64 {
    let angle = (1.0f64 / 5.0f64.sqrt()).acos();
    angle / (1u64 << level.min(62)) as f64 * sphere_length_scale()
}

/// Icosahedral subdivision of the unit sphere, `10 * 4^level + 2` vertices,
/// triangles oriented with outward normals.
pub(super) fn icosphere(level: usize) -> (Vec<Point>, Vec<[usize; 3]>) {
    let raw = [
        [-1.0, PHI, 0.0],
        [1.0, PHI, 0.0],
        [-1.0, -PHI, 0.0],
        [1.0, -PHI, 0.0],
        [0.0, -1.0, PHI],
        [0.0, 1.0, PHI],
        [0.0, -1.0, -PHI],
        [0.0, 1.0, -PHI],
        [PHI, 0.0, -1.0],
        [PHI, 0.0, 1.0],
        [-PHI, 0.0, -1.0],
        [-PHI, 0.0, 1.0],
    ];
    let mut vertices: Vec<Point> = raw.iter().map(normalize).collect();
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push(normalize(&[p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for &[a, b, c] in &triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        triangles = next;
    }
    (vertices, triangles)
}

/// Rotation taking unit vector `a` onto unit vector `b`.
fn rotation_between(a: &Point, b: &Point) -> [[f64; 3]; 3] {
    let c = dot(a, b);
    let mut axis = cross(a, b);
    let s = norm(&axis);
    if s < 1e-15 {
        if c > 0.0 {
            return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        }
        // Half turn about any axis perpendicular to `a`.
        let helper = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        axis = normalize(&cross(a, &helper));
        let k = axis;
        return std::array::from_fn(|i| std::array::from_fn(|j| 2.0 * k[i] * k[j] - f64::from(i == j)));
    }
    let k = [axis[0] / s, axis[1] / s, axis[2] / s];
    let angle = s.atan2(c);
    let (sin, cos) = angle.sin_cos();
    let kx = [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]];
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let kk: f64 = (0..3).map(|m| kx[i][m] * kx[m][j]).sum();
            f64::from(i == j) + sin * kx[i][j] + (1.0 - cos) * kk
        })
    })
}

fn apply(r: &[[f64; 3]; 3], p: &Point) -> Point {
    std::array::from_fn(|i| dot(&r[i], p))
}

/// Rotates the mesh so the first singular point is an exact vertex and snaps
/// the others onto their nearest vertices. Returns singular id -> vertex.
pub(super) fn place_singular(
    vertices: &mut [Point],
    triangles: &[[usize; 3]],
    points: &[Point],
) -> Result<BTreeMap<usize, usize>> {
    let mut placed = BTreeMap::new();
    let Some(first) = points.first() else {
        return Ok(placed);
    };
    // Vertex 5 is normalize(0, 1, phi).
    let anchor = 5;
    let rot = rotation_between(&vertices[anchor], first);
    for v in vertices.iter_mut() {
        *v = normalize(&apply(&rot, v));
    }
    vertices[anchor] = *first;
    placed.insert(0, anchor);

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for (t, tri) in triangles.iter().enumerate() {
        for &v in tri {
            incident[v].push(t);
        }
    }
    let mut owner: HashMap<usize, usize> = HashMap::from([(anchor, 0)]);
    for (id, p) in points.iter().enumerate().skip(1) {
        let (v, moved) = vertices
            .iter()
            .enumerate()
            .map(|(v, q)| (v, great_circle(q, p)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("mesh has vertices");
        if let Some(&other) = owner.get(&v) {
            return Err(MeshError::SnapCollision { id, other });
        }
        let edge = incident[v]
            .iter()
            .flat_map(|&t| triangles[t].iter().map(move |&w| (t, w)))
            .filter(|&(_, w)| w != v)
            .map(|(_, w)| great_circle(&vertices[v], &vertices[w]))
            .fold(f64::INFINITY, f64::min);
        if moved > edge {
            return Err(MeshError::SnapTooFar {
                id,
                moved: moved * sphere_length_scale(),
                edge: edge * sphere_length_scale(),
            });
        }
        let old = vertices[v];
        vertices[v] = *p;
        for &t in &incident[v] {
            let [a, b, c] = triangles[t];
            let n = cross(&sub(&vertices[b], &vertices[a]), &sub(&vertices[c], &vertices[a]));
            let centroid = [
                vertices[a][0] + vertices[b][0] + vertices[c][0],
                vertices[a][1] + vertices[b][1] + vertices[c][1],
                vertices[a][2] + vertices[b][2] + vertices[c][2],
            ];
            if dot(&n, &centroid) <= 0.0 {
                vertices[v] = old;
                return Err(MeshError::SnapInverts { id });
            }
        }
        owner.insert(v, id);
        placed.insert(id, v);
    }
    Ok(placed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        for level in 0..4 {
            let (v, t) = icosphere(level);
            assert_eq!(v.len(), 10 * 4usize.pow(level as u32) + 2);
            assert_eq!(t.len(), 20 * 4usize.pow(level as u32));
        }
    }

    #[test]
    fn outward_orientation() {
        let (v, t) = icosphere(1);
        for &[a, b, c] in &t {
            let n = cross(&sub(&v[b], &v[a]), &sub(&v[c], &v[a]));
            assert!(dot(&n, &v[a]) > 0.0);
        }
    }

    #[test]
    fn rotation_is_exact_on_target() {
        let a = normalize(&[0.0, 1.0, PHI]);
        for b in [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], normalize(&[1.0, -2.0, 0.5]), [-a[0], -a[1], -a[2]]] {
            let r = rotation_between(&a, &b);
            let img = apply(&r, &a);
            assert!(norm(&sub(&img, &b)) < 1e-14, "{img:?} vs {b:?}");
        }
    }
}
