//! Verification instruments: centre/scale of concentration, the join
//! projection, simultaneous mass splitting, Pohozaev identities on the disk and
//! through stereographic projection, blow-up quantization and energy probes.

mod concentration;
mod pohozaev;
mod probe;
mod quantization;
mod split;
mod stereo;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::bubbles::BubbleError;
use crate::fields::FieldError;
use crate::mesh::MeshError;

pub use concentration::{
    barycenter_ids, concentration, join_projection, t_prime, ConcentrationBranch, ConcentrationConfig,
    ConcentrationState, JoinProjection,
};
pub use pohozaev::pohozaev_disk;
pub use probe::{
    bubble_members, mt_deficit_probe, write_deficit_csv, Boundedness, DeficitRow, ProbeMember, ProbeReport, RhoVerdict,
};
pub use quantization::{quantization_check, regular_table, singular_table, BlowUpLocation, QuantizationVerdict};
pub use split::{half_plane_mass, mass_split_disk, MassSplit};
pub use stereo::stereographic_pohozaev;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("density is not normalized: total mass {0}")]
    NotNormalized(f64),
    #[error("density has a negative or non-finite entry at vertex {0}")]
    BadDensity(usize),
    #[error("{0}")]
    Surface(&'static str),
    #[error("field is not in the Dirichlet gauge: |u| = {0:.3e} on the boundary")]
    NotDirichlet(f64),
    #[error("the identity needs constant backgrounds h_1, h_2")]
    NonConstantBackground,
    #[error("{0}")]
    Singulars(String),
    #[error("tail of component {component} beyond radius {radius:.3e} carries {fraction:.3e} of the integral")]
    Tail { component: usize, radius: f64, fraction: f64 },
    #[error("no sign change of a1 - a2 on {samples} angles")]
    NoSignChange { samples: usize },
    #[error("split check failed: masses {below:.9} and {above:.9}")]
    SplitCheck { below: f64, above: f64 },
    #[error("probe: {0}")]
    Probe(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Bubble(#[from] BubbleError),
}

pub type Result<T, E = DiagnosticsError> = std::result::Result<T, E>;

/// Two sides of an integral identity with their intermediate integrals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PohozaevReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(|lhs|, |rhs|, 1)`.
    pub relative_gap: f64,
    pub components: BTreeMap<String, f64>,
}

impl PohozaevReport {
    fn new(lhs: f64, rhs: f64, components: BTreeMap<String, f64>) -> Self {
        let relative_gap = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0);
        Self { lhs, rhs, relative_gap, components }
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.get(name).copied()
    }
}
