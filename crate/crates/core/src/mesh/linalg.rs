use sprs::{CsMat, TriMat};
use sprs::{FillInReduction, SymmetryCheck};
use sprs_ldl::{Ldl, LdlNumeric};

use super::{cross, dot, sub, Gauge, MeshError, Point, Result, SurfaceMesh};

/// Cotangent stiffness `S_ij = -(cot a_ij + cot b_ij)/2`, rows summing to zero.
pub(super) fn cotangent_stiffness(vertices: &[Point], triangles: &[[usize; 3]]) -> CsMat<f64> {
    let n = vertices.len();
    let mut tri = TriMat::with_capacity((n, n), 12 * triangles.len());
    for t in triangles {
        for k in 0..3 {
            let (c, i, j) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            let e1 = sub(&vertices[i], &vertices[c]);
            let e2 = sub(&vertices[j], &vertices[c]);
            let w = 0.5 * dot(&e1, &e2) / super::norm(&cross(&e1, &e2));
            tri.add_triplet(i, j, -w);
            tri.add_triplet(j, i, -w);
            tri.add_triplet(i, i, w);
            tri.add_triplet(j, j, w);
        }
    }
    tri.to_csr()
}

pub(super) fn matvec(a: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    a.outer_iterator().map(|row| row.iter().map(|(j, v)| v * x[j]).sum()).collect()
}

/// Sparse LDL^T factorization of the stiffness matrix on the free vertices of a gauge.
///
/// On the sphere one vertex is pinned and the solution is re-centred afterwards;
/// on the disk boundary vertices are eliminated.
pub struct PoissonFactor {
    gauge: Gauge,
    free: Vec<usize>,
    reduced: CsMat<f64>,
    ldl: LdlNumeric<f64, usize>,
    pivot_ratio: f64,
}

impl std::fmt::Debug for PoissonFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonFactor")
            .field("gauge", &self.gauge)
            .field("unknowns", &self.free.len())
            .field("pivot_ratio", &self.pivot_ratio)
            .finish()
    }
}

const RESIDUAL_TOL: f64 = 1e-9;

impl PoissonFactor {
    pub(super) fn new(mesh: &SurfaceMesh, gauge: Gauge) -> Result<Self> {
        let n = mesh.num_vertices();
        let mut slot = vec![usize::MAX; n];
        let free: Vec<usize> = match gauge {
            Gauge::ZeroMean => (1..n).collect(),
            Gauge::Dirichlet => (0..n).filter(|&v| !mesh.is_boundary(v)).collect(),
        };
        for (k, &v) in free.iter().enumerate() {
            slot[v] = k;
        }
        let m = free.len();
        let mut tri = TriMat::new((m, m));
        for (i, row) in mesh.stiffness().outer_iterator().enumerate() {
            if slot[i] == usize::MAX {
                continue;
            }
            for (j, &v) in row.iter() {
                if slot[j] != usize::MAX {
                    tri.add_triplet(slot[i], slot[j], v);
                }
            }
        }
        let reduced: CsMat<f64> = tri.to_csr();
        let ldl = Ldl::new()
            .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
            .check_symmetry(SymmetryCheck::DontCheckSymmetry)
            .numeric(reduced.view())
            .map_err(|e| MeshError::SolveFailed { reason: e.to_string(), pivot_ratio: f64::NAN })?;
        let (lo, hi) = ldl.d().iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d.abs())));
        let pivot_ratio = hi / lo.abs();
        if !(lo > 0.0) || !pivot_ratio.is_finite() {
            return Err(MeshError::SolveFailed {
                reason: "stiffness matrix is not positive definite on the gauge subspace".into(),
                pivot_ratio,
            });
        }
        Ok(Self { gauge, free, reduced, ldl, pivot_ratio })
    }

    /// Ratio of the largest to the smallest LDL^T pivot, a cheap conditioning indicator.
    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    /// Solves `S u = load` on the gauge subspace with one step of iterative refinement.
    pub fn solve(&self, mesh: &SurfaceMesh, load: &[f64]) -> Result<Vec<f64>> {
        let b: Vec<f64> = self.free.iter().map(|&v| load[v]).collect();
        let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut x: Vec<f64> = self.ldl.solve(&b);
        let mut r = residual(&self.reduced, &x, &b);
        if norm2(&r) > RESIDUAL_TOL * bnorm {
            let dx: Vec<f64> = self.ldl.solve(&r);
            x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
            r = residual(&self.reduced, &x, &b);
        }
        let rnorm = norm2(&r);
        if !rnorm.is_finite() || rnorm > RESIDUAL_TOL * bnorm.max(1e-300) && rnorm > 1e-14 {
            return Err(MeshError::SolveFailed {
                reason: format!("relative residual {:.3e} after refinement", rnorm / bnorm),
                pivot_ratio: self.pivot_ratio,
            });
        }
        let mut u = vec![0.0; mesh.num_vertices()];
        for (&v, xv) in self.free.iter().zip(x) {
            u[v] = xv;
        }
        if self.gauge == Gauge::ZeroMean {
            mesh.project_gauge(&mut u, Gauge::ZeroMean);
        }
        Ok(u)
    }
}

fn residual(a: &CsMat<f64>, x: &[f64], b: &[f64]) -> Vec<f64> {
    matvec(a, x).iter().zip(b).map(|(ax, b)| b - ax).collect()
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
