//! Longest-edge propagation bisection on the unit sphere.

use std::collections::HashMap;

use super::{great_circle, norm, normalize, sub, Point};

type Edge = (usize, usize);

fn key(a: usize, b: usize) -> Edge {
    (a.min(b), a.max(b))
}

struct Refiner<'a> {
    vertices: &'a mut Vec<Point>,
    triangles: &'a mut Vec<[usize; 3]>,
    edges: HashMap<Edge, Vec<usize>>,
    targets: &'a [Point],
    distance: Vec<f64>,
    ratio: f64,
    floor: f64,
}

impl Refiner<'_> {
    fn edge_len(&self, e: Edge) -> f64 {
        norm(&sub(&self.vertices[e.0], &self.vertices[e.1]))
    }

    /// Longest edge under the strict order (length, min index, max index).
    fn longest(&self, t: usize) -> Edge {
        let tri = self.triangles[t];
        (0..3)
            .map(|k| key(tri[k], tri[(k + 1) % 3]))
            .max_by(|&a, &b| self.edge_len(a).total_cmp(&self.edge_len(b)).then(a.cmp(&b)))
            .expect("three edges")
    }

    fn vertex_distance(&mut self, v: usize) -> f64 {
        while self.distance.len() <= v {
            let p = self.vertices[self.distance.len()];
            let d = self.targets.iter().map(|q| great_circle(&p, q)).fold(f64::INFINITY, f64::min);
            self.distance.push(d);
        }
        self.distance[v]
    }

    fn needs_split(&mut self, t: usize) -> bool {
        let tri = self.triangles[t];
        let d = tri.iter().map(|&v| self.vertex_distance(v)).fold(f64::INFINITY, f64::min);
        let e = self.longest(t);
        self.edge_len(e) > self.floor.max(self.ratio * d)
    }

    fn detach(&mut self, t: usize) {
        let tri = self.triangles[t];
        for k in 0..3 {
            let e = key(tri[k], tri[(k + 1) % 3]);
            if let Some(list) = self.edges.get_mut(&e) {
                list.retain(|&x| x != t);
                if list.is_empty() {
                    self.edges.remove(&e);
                }
            }
        }
    }

    fn attach(&mut self, t: usize) {
        let tri = self.triangles[t];
        for k in 0..3 {
            self.edges.entry(key(tri[k], tri[(k + 1) % 3])).or_default().push(t);
        }
    }

    /// Splits triangle `t` across edge `e` through midpoint vertex `m`.
    fn split(&mut self, t: usize, e: Edge, m: usize) {
        let tri = self.triangles[t];
        let k = (0..3).find(|&k| key(tri[k], tri[(k + 1) % 3]) == e).expect("edge belongs to triangle");
        let (a, b, c) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
        self.detach(t);
        self.triangles[t] = [a, m, c];
        self.attach(t);
        self.triangles.push([m, b, c]);
        self.attach(self.triangles.len() - 1);
    }

    fn bisect_lepp(&mut self, start: usize) {
        let mut stack = vec![start];
        while let Some(&t) = stack.last() {
            let e = self.longest(t);
            let neighbour = self.edges[&e].iter().copied().find(|&x| x != t);
            match neighbour {
                Some(n) if self.longest(n) != e => stack.push(n),
                _ => {
                    let (p, q) = (self.vertices[e.0], self.vertices[e.1]);
                    self.vertices.push(normalize(&[p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                    let m = self.vertices.len() - 1;
                    self.split(t, e, m);
                    if let Some(n) = neighbour {
                        self.split(n, e, m);
                    }
                    stack.pop();
                }
            }
        }
    }
}

/// Refines until every triangle's longest chord is at most
/// `max(floor, ratio * d)`, with `d` the smallest vertex angle to a target.
pub(super) fn refine_towards(
    vertices: &mut Vec<Point>,
    triangles: &mut Vec<[usize; 3]>,
    targets: &[Point],
    ratio: f64,
    floor: f64,
) {
    if targets.is_empty() || !(floor > 0.0) {
        return;
    }
    let mut r = Refiner { vertices, triangles, edges: HashMap::new(), targets, distance: Vec::new(), ratio, floor };
    for t in 0..r.triangles.len() {
        r.attach(t);
    }
    loop {
        let mut changed = false;
        let mut t = 0;
        while t < r.triangles.len() {
            while r.needs_split(t) {
                r.bisect_lepp(t);
                changed = true;
            }
            t += 1;
        }
        if !changed {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::icosphere::icosphere;
    use super::*;

    #[test]
    fn refinement_is_conforming_and_graded() {
        let (mut v, mut t) = icosphere(2);
        let target = [v[5]];
        refine_towards(&mut v, &mut t, &target, 0.3, 1e-3);
        let mut count: HashMap<Edge, usize> = HashMap::new();
        for tri in &t {
            for k in 0..3 {
                *count.entry(key(tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        assert!(count.values().all(|&c| c == 2), "non-conforming edge");
        assert_eq!(v.len() + t.len() - count.len(), 2, "Euler characteristic");
        let finest = t
            .iter()
            .filter(|tri| tri.contains(&5))
            .flat_map(|tri| (0..3).map(|k| norm(&sub(&v[tri[k]], &v[tri[(k + 1) % 3]]))))
            .fold(0.0, f64::max);
        assert!(finest <= 1e-3);
    }
}
