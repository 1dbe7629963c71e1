use std::f64::consts::PI;

use super::Point;

/// Ring structure of a disk mesh: vertex 0 is the origin, ring `k` (1-based)
/// holds `counts[k]` vertices at radius `radii[k]` and angles `2 pi j / counts[k]`.
#[derive(Clone, Debug)]
pub struct DiskRings {
    starts: Vec<usize>,
    counts: Vec<usize>,
    radii: Vec<f64>,
}

impl DiskRings {
    pub fn num_rings(&self) -> usize {
        self.radii.len() - 1
    }

    pub fn radius(&self, k: usize) -> f64 {
        self.radii[k]
    }

    pub fn count(&self, k: usize) -> usize {
        self.counts[k]
    }

    pub fn ring(&self, k: usize) -> std::ops::Range<usize> {
        self.starts[k]..self.starts[k] + self.counts[k]
    }

    /// Value of a vertex field on ring `k` at angle `theta`, linear in angle.
    pub fn sample(&self, field: &[f64], k: usize, theta: f64) -> f64 {
        if k == 0 {
            return field[0];
        }
        let n = self.counts[k];
        let x = theta.rem_euclid(2.0 * PI) / (2.0 * PI) * n as f64;
        let j = (x.floor() as usize).min(n - 1);
        let w = x - j as f64;
        let start = self.starts[k];
        (1.0 - w) * field[start + j] + w * field[start + (j + 1) % n]
    }

    /// Outward normal derivative at each boundary vertex, from a one-sided
    /// three-point stencil over the outer three rings. Returns `(theta, value)`.
    pub fn boundary_normal_derivative(&self, field: &[f64]) -> Vec<(f64, f64)> {
        let n = self.num_rings();
        let (x0, x1, x2) = (self.radii[n - 2], self.radii[n - 1], self.radii[n]);
        let c0 = (x2 - x1) / ((x0 - x1) * (x0 - x2));
        let c1 = (x2 - x0) / ((x1 - x0) * (x1 - x2));
        let c2 = (2.0 * x2 - x0 - x1) / ((x2 - x0) * (x2 - x1));
        let m = self.counts[n];
        self.ring(n)
            .enumerate()
            .map(|(j, v)| {
                let theta = 2.0 * PI * j as f64 / m as f64;
                let f0 = self.sample(field, n - 2, theta);
                let f1 = self.sample(field, n - 1, theta);
                (theta, c0 * f0 + c1 * f1 + c2 * field[v])
            })
            .collect()
    }
}

/// Ring mesh of the unit disk with radii `(k/rings)^grading`.
pub(super) fn ring_mesh(rings: usize, grading: f64) -> (Vec<Point>, Vec<[usize; 3]>, DiskRings) {
    let mut vertices: Vec<Point> = vec![[0.0; 3]];
    let mut starts = vec![0];
    let mut counts = vec![1];
    let mut radii = vec![0.0];
    for k in 1..=rings {
        let r = if k == rings { 1.0 } else { (k as f64 / rings as f64).powf(grading) };
        let n = ((2.0 * PI * k as f64 / grading).round() as usize).max(6);
        starts.push(vertices.len());
        counts.push(n);
        radii.push(r);
        for j in 0..n {
            let (s, c) = (2.0 * PI * j as f64 / n as f64).sin_cos();
            vertices.push([r * c, r * s, 0.0]);
        }
    }
    let mut triangles = Vec::new();
    let first = starts[1];
    for j in 0..counts[1] {
        triangles.push([0, first + j, first + (j + 1) % counts[1]]);
    }
    for k in 2..=rings {
        let (si, ni) = (starts[k - 1], counts[k - 1]);
        let (so, no) = (starts[k], counts[k]);
        let (mut i, mut j) = (0, 0);
        while i < ni || j < no {
            let next_in = (i + 1) as f64 / ni as f64;
            let next_out = (j + 1) as f64 / no as f64;
            if j < no && (i == ni || next_out <= next_in) {
                triangles.push([si + i % ni, so + j, so + (j + 1) % no]);
                j += 1;
            } else {
                triangles.push([si + i % ni, so + j % no, si + (i + 1) % ni]);
                i += 1;
            }
        }
    }
    (vertices, triangles, DiskRings { starts, counts, radii })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_and_euler() {
        let (v, t, rings) = ring_mesh(12, 1.5);
        let area: f64 = t
            .iter()
            .map(|&[a, b, c]| {
                0.5 * ((v[b][0] - v[a][0]) * (v[c][1] - v[a][1]) - (v[c][0] - v[a][0]) * (v[b][1] - v[a][1]))
            })
            .sum();
        assert!(area > 0.0 && (area - PI).abs() < 0.05, "area {area}");
        assert!(t.iter().all(|&[a, b, c]| {
            ((v[b][0] - v[a][0]) * (v[c][1] - v[a][1]) - (v[c][0] - v[a][0]) * (v[b][1] - v[a][1])) > 0.0
        }));
        let boundary = rings.count(12);
        // V - E + F = 1 with every interior edge shared by two triangles.
        let edges = (3 * t.len() + boundary) / 2;
        assert_eq!(v.len() + t.len(), edges + 1);
    }

    #[test]
    fn normal_derivative_of_quadratic_is_exact() {
        let (v, _, rings) = ring_mesh(10, 1.0);
        let f: Vec<f64> = v.iter().map(|p| p[0] * p[0] + p[1] * p[1]).collect();
        for (_, d) in rings.boundary_normal_derivative(&f) {
            assert!((d - 2.0).abs() < 1e-10);
        }
    }
}
