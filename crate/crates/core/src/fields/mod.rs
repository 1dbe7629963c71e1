//! Problem data and the discrete energy: effective weights, the quadratic
//! form `Q`, the functionals `J` and `I`, gradients and normalized densities.

mod energy;
mod io;
mod pair;
mod params;
mod weights;

use thiserror::Error;

use crate::mesh::{Gauge, MeshError, SurfaceKind};

pub use energy::{
    density, evaluate, i_energy_scalar, j_energy, j_gradient, log_integral, q_energy, singular_integral, Density,
    Evaluation,
};
pub use io::{read_field_csv, write_field_csv};
pub use pair::PairField;
pub use params::{Background, ProblemParams, SingularPoint};
pub use weights::{effective_weights, EffectiveWeights, WeightMode};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("singular point {id}: alpha_{component}{id} = {alpha} must exceed -1")]
    InvalidAlpha { id: usize, component: usize, alpha: f64 },
    #[error("rho_{component} = {value} must be a positive finite number")]
    InvalidRho { component: usize, value: f64 },
    #[error("background h_{component} is not positive at vertex {vertex} (value {value})")]
    NonPositiveBackground { component: usize, vertex: usize, value: f64 },
    #[error("background samples have length {got}, the mesh has {expected} vertices")]
    BackgroundLength { expected: usize, got: usize },
    #[error("Green-function weights need the closed sphere")]
    GreenOnDisk,
    #[error("max of the exponent is {0:.3e} > 700; use the log-integral instead")]
    Overflow(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("field has {got} values, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("field gauge {gauge:?} does not match the {kind:?} surface")]
    GaugeMismatch { gauge: Gauge, kind: SurfaceKind },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("field file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = FieldError> = std::result::Result<T, E>;
