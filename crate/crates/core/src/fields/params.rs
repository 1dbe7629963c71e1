use serde::{Deserialize, Serialize};

use super::{FieldError, Result};
use crate::mesh::{Point, SurfaceMesh};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub id: usize,
    pub position: Point,
    /// `[alpha_1m, alpha_2m]`.
    pub alpha: [f64; 2],
}

/// Smooth positive background function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Background {
    Constant(f64),
    /// `constant + linear . x`.
    Affine {
        constant: f64,
        linear: [f64; 3],
    },
    /// One value per vertex.
    Samples(Vec<f64>),
}

impl Background {
    pub fn eval(&self, vertex: usize, x: &Point) -> f64 {
        match self {
            Background::Constant(c) => *c,
            Background::Affine { constant, linear } => {
                constant + linear[0] * x[0] + linear[1] * x[1] + linear[2] * x[2]
            }
            Background::Samples(v) => v[vertex],
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Background::Constant(_) => true,
            Background::Affine { linear, .. } => linear.iter().all(|&c| c == 0.0),
            Background::Samples(v) => v.windows(2).all(|w| w[0] == w[1]),
        }
    }

    /// Vertex samples, checked for positivity.
    pub fn samples(&self, mesh: &SurfaceMesh, component: usize) -> Result<Vec<f64>> {
        if let Background::Samples(v) = self {
            if v.len() != mesh.num_vertices() {
                return Err(FieldError::BackgroundLength { expected: mesh.num_vertices(), got: v.len() });
            }
        }
        mesh.vertices()
            .iter()
            .enumerate()
            .map(|(vertex, x)| {
                let value = self.eval(vertex, x);
                if value > 0.0 && value.is_finite() {
                    Ok(value)
                } else {
                    Err(FieldError::NonPositiveBackground { component: component + 1, vertex, value })
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub rho: [f64; 2],
    pub singulars: Vec<SingularPoint>,
    pub h: [Background; 2],
}

impl ProblemParams {
    pub fn new(rho: [f64; 2], singulars: Vec<SingularPoint>, h: [Background; 2]) -> Result<Self> {
        let p = Self { rho, singulars, h };
        p.validate()?;
        Ok(p)
    }

    /// Constant unit background.
    pub fn uniform(rho: [f64; 2], singulars: Vec<SingularPoint>) -> Result<Self> {
        Self::new(rho, singulars, [Background::Constant(1.0), Background::Constant(1.0)])
    }

    pub fn validate(&self) -> Result<()> {
        for (i, &value) in self.rho.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(FieldError::InvalidRho { component: i + 1, value });
            }
        }
        for s in &self.singulars {
            for (i, &alpha) in s.alpha.iter().enumerate() {
                if !(alpha > -1.0 && alpha.is_finite()) {
                    return Err(FieldError::InvalidAlpha { id: s.id, component: i + 1, alpha });
                }
            }
        }
        Ok(())
    }

    pub fn with_rho(&self, rho: [f64; 2]) -> Self {
        Self { rho, ..self.clone() }
    }

    pub fn alphas(&self) -> Vec<[f64; 2]> {
        self.singulars.iter().map(|s| s.alpha).collect()
    }

    pub fn positions(&self) -> Vec<Point> {
        self.singulars.iter().map(|s| s.position).collect()
    }
}
