use super::{FieldError, Result};
use crate::mesh::{Gauge, ScalarField, SurfaceMesh};

/// The unknown `(u1, u2)` on a common mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct PairField {
    components: [ScalarField; 2],
    gauge: Gauge,
}

impl PairField {
    pub fn new(u1: ScalarField, u2: ScalarField, gauge: Gauge) -> Self {
        assert_eq!(u1.len(), u2.len(), "components live on the same mesh");
        Self { components: [u1, u2], gauge }
    }

    pub fn zeros(mesh: &SurfaceMesh) -> Self {
        let n = mesh.num_vertices();
        Self::new(ScalarField::zeros(n), ScalarField::zeros(n), mesh.natural_gauge())
    }

    /// Builds a field in the natural gauge of `mesh` and projects onto it.
    pub fn projected(mesh: &SurfaceMesh, u1: Vec<f64>, u2: Vec<f64>) -> Result<Self> {
        for u in [&u1, &u2] {
            if u.len() != mesh.num_vertices() {
                return Err(FieldError::Length { expected: mesh.num_vertices(), got: u.len() });
            }
        }
        let mut p = Self::new(u1.into(), u2.into(), mesh.natural_gauge());
        p.project(mesh);
        Ok(p)
    }

    pub fn u1(&self) -> &ScalarField {
        &self.components[0]
    }

    pub fn u2(&self) -> &ScalarField {
        &self.components[1]
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut ScalarField {
        &mut self.components[i]
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn len(&self) -> usize {
        self.components[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn project(&mut self, mesh: &SurfaceMesh) {
        for c in &mut self.components {
            mesh.project_gauge(c, self.gauge);
        }
    }

    /// Largest violation of the gauge constraint: `|mean|` or `max |u|` on the boundary.
    pub fn gauge_violation(&self, mesh: &SurfaceMesh) -> f64 {
        self.components
            .iter()
            .map(|c| match self.gauge {
                Gauge::ZeroMean => mesh.mean(c).abs(),
                Gauge::Dirichlet => mesh.boundary().iter().map(|&b| c[b].abs()).fold(0.0, f64::max),
            })
            .fold(0.0, f64::max)
    }

    /// `self + t d`.
    pub fn axpy(&self, t: f64, d: &PairField) -> PairField {
        let mut out = self.clone();
        for (c, dc) in out.components.iter_mut().zip(&d.components) {
            c.iter_mut().zip(dc.iter()).for_each(|(x, y)| *x += t * y);
        }
        out
    }

    /// Adds a constant to each component (leaves the gauge subspace).
    pub fn shifted(&self, c: [f64; 2]) -> PairField {
        let mut out = self.clone();
        for (comp, c) in out.components.iter_mut().zip(c) {
            comp.iter_mut().for_each(|x| *x += c);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flat_map(|c| c.iter()).fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.iter().all(|x| x.is_finite()))
    }
}
