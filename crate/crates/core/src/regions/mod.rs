//! Classification of `(rho, alpha)` configurations: critical thresholds, the
//! existence criterion, the compactness-failure set, non-existence conditions,
//! homology of the punctured join, and parameter-plane scans.

mod gamma;
mod join;
mod nonexistence;
mod scan;
mod thresholds;

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::mesh::SurfaceKind;

pub use gamma::{gamma_membership, GammaMembership, GammaSet, Ray};
pub use join::{join_betti, JoinBetti, JoinGraph};
pub use nonexistence::{
    disk_form, disk_nonexistence, sphere_forms, sphere_nonexistence, SphereNonexistence, SphereVerdict,
};
pub use scan::{scan_regions, write_region_csv, write_region_svg, RegionLabel, RegionMap, ScanGrid};
pub use thresholds::{coercive_bound, count_m, existence_verdict, rho_bar, ExistenceVerdict, MCount};

/// Per singular point, the weights `[alpha_1m, alpha_2m]` of the two components.
pub type AlphaPair = [f64; 2];

/// Width of the band around thresholds inside which no verdict is issued.
pub const BOUNDARY_BAND: f64 = 1e-9 * 4.0 * PI;

#[derive(Debug, Error, PartialEq)]
pub enum RegionError {
    #[error("invalid counts (M1, M2, M3) = ({0}, {1}, {2}): need M3 <= min(M1, M2)")]
    InvalidCounts(usize, usize, usize),
    #[error("join homology needs M1, M2 >= 1, got ({0}, {1})")]
    EmptyJoinSide(usize, usize),
    #[error("enumerating the compactness-failure set up to {bound:.6} exceeds {limit} values")]
    GammaTooLarge { bound: f64, limit: usize },
    #[error("scan grid has {0} cells, need at least 4")]
    GridTooCoarse(usize),
    #[error("invalid scan range [{lo}, {hi}]")]
    BadRange { lo: f64, hi: f64 },
    #[error("the sphere non-existence test needs two antipodal points with distinct weight pairs")]
    NotAntipodalPair,
}

/// Geometric setting of a classification.
#[derive(Clone, Debug, Serialize)]
pub struct Configuration {
    pub kind: SurfaceKind,
    pub alphas: Vec<AlphaPair>,
    /// Exactly two singular points and they are antipodal.
    pub antipodal: bool,
    /// Background functions are constant, as the non-existence criteria require.
    pub constant_background: bool,
}

impl Configuration {
    pub fn disk(alpha: AlphaPair) -> Self {
        Self { kind: SurfaceKind::UnitDisk, alphas: vec![alpha], antipodal: false, constant_background: true }
    }

    pub fn antipodal_sphere(p1: AlphaPair, p2: AlphaPair) -> Self {
        Self { kind: SurfaceKind::ClosedSphere, alphas: vec![p1, p2], antipodal: true, constant_background: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExistenceStatus {
    ExistenceGuaranteed,
    NoInfo,
    NotApplicable { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Applicability<T> {
    Applicable { value: T },
    NotApplicable { reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub rho: [f64; 2],
    pub rho_bar: [f64; 2],
    pub m: [usize; 3],
    pub on_threshold: bool,
    pub coercive: bool,
    pub existence: ExistenceStatus,
    pub in_gamma: bool,
    pub gamma_distance: f64,
    pub disk_nonexistence: Applicability<bool>,
    pub sphere_nonexistence: Applicability<SphereVerdict>,
    pub betti: Applicability<JoinBetti>,
}

/// Full classification of one parameter point.
pub fn classify(config: &Configuration, rho: [f64; 2]) -> Result<ClassificationReport, RegionError> {
    let rho_bar = rho_bar(&config.alphas);
    let counts = count_m(rho, &config.alphas);
    let bound = rho[0].max(rho[1]);
    let gamma = gamma_membership(rho, &config.alphas, bound)?;
    let coercive = (0..2).all(|i| rho[i] < coercive_bound(&config.alphas, i));
    let m = counts.m;

    let existence = if config.kind != SurfaceKind::ClosedSphere {
        ExistenceStatus::NotApplicable { reason: "the existence criterion is stated for closed surfaces".into() }
    } else if counts.on_threshold {
        ExistenceStatus::NotApplicable { reason: "rho lies on a counting threshold".into() }
    } else if !(rho[0] < rho_bar[0] && rho[1] < rho_bar[1]) {
        ExistenceStatus::NotApplicable { reason: "rho_i >= rho_bar_i for some i".into() }
    } else if gamma.in_gamma {
        ExistenceStatus::NotApplicable { reason: "rho belongs to the compactness-failure set".into() }
    } else {
        match existence_verdict(m)? {
            ExistenceVerdict::ExistenceGuaranteed => ExistenceStatus::ExistenceGuaranteed,
            ExistenceVerdict::NoInfo => ExistenceStatus::NoInfo,
        }
    };

    let disk_nonexistence = match (config.kind, config.alphas.as_slice()) {
        (SurfaceKind::UnitDisk, _) if !config.constant_background => {
            Applicability::NotApplicable { reason: "non-constant background".into() }
        }
        (SurfaceKind::UnitDisk, []) => Applicability::Applicable { value: disk_nonexistence(rho, [0.0, 0.0]) },
        (SurfaceKind::UnitDisk, [a]) => Applicability::Applicable { value: disk_nonexistence(rho, *a) },
        _ => Applicability::NotApplicable { reason: "needs the disk with one singularity at the origin".into() },
    };

    let sphere_nonexistence = match (config.kind, config.alphas.as_slice()) {
        (SurfaceKind::ClosedSphere, [p1, p2]) if config.antipodal && config.constant_background => {
            let v = sphere_nonexistence(rho, *p1, *p2);
            if v.verdict == SphereNonexistence::NotApplicable {
                Applicability::NotApplicable { reason: "the two weight pairs coincide".into() }
            } else {
                Applicability::Applicable { value: v }
            }
        }
        _ => Applicability::NotApplicable {
            reason: "needs the sphere with two antipodal singularities and constant background".into(),
        },
    };

    let betti = match join_betti(m) {
        Ok(b) => Applicability::Applicable { value: b },
        Err(e) => Applicability::NotApplicable { reason: e.to_string() },
    };

    Ok(ClassificationReport {
        rho,
        rho_bar,
        m,
        on_threshold: counts.on_threshold,
        coercive,
        existence,
        in_gamma: gamma.in_gamma,
        gamma_distance: gamma.distance,
        disk_nonexistence,
        sphere_nonexistence,
        betti,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_sphere_low_rho() {
        let cfg = Configuration {
            kind: SurfaceKind::ClosedSphere,
            alphas: vec![],
            antipodal: false,
            constant_background: true,
        };
        let r = classify(&cfg, [2.0 * PI, 2.0 * PI]).unwrap();
        assert_eq!(r.m, [0, 0, 0]);
        assert!(r.coercive);
        assert!((r.gamma_distance - 2.0 * PI).abs() < 1e-12);
    }
}
