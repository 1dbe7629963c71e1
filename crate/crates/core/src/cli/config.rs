use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bubbles::{BubbleFamily, TSchedule};
use crate::fields::{Background, ProblemParams, SingularPoint};
use crate::mesh::{
    build_disk, build_sphere, build_surface_mesh, default_disk_grading, geodesic_distance, nominal_edge, Point,
    SphereGrading, SurfaceKind, SurfaceMesh,
};
use crate::regions::Configuration;

/// One validation finding, anchored at a key path of the config.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
pub enum Units {
    #[default]
    #[serde(rename = "absolute")]
    Absolute,
    /// Every `rho` value is a multiple of `4 pi`.
    #[serde(rename = "4pi")]
    FourPi,
}

impl Units {
    pub fn scale(self) -> f64 {
        match self {
            Units::Absolute => 1.0,
            Units::FourPi => 4.0 * PI,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceChoice {
    Sphere,
    Disk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightChoice {
    Model,
    Green,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineConfig {
    pub ratio: f64,
    pub min_size: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub kind: SurfaceChoice,
    /// Subdivision level on the sphere, ring count on the disk.
    pub resolution: usize,
    /// Sphere: refinement factor (1 = none). Disk: radial exponent.
    pub grading: Option<f64>,
    /// Explicit sphere refinement, overriding `grading`.
    pub refine: Option<RefineConfig>,
    pub weights: Option<WeightChoice>,
}

/// `at` is (colatitude, longitude) in radians on the sphere and (x, y) on the disk.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularConfig {
    pub at: [f64; 2],
    pub alpha: [f64; 2],
}

/// `constant + linear . x`, or a bare number.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum HConfig {
    Constant(f64),
    Affine {
        constant: f64,
        #[serde(default)]
        linear: [f64; 3],
    },
}

impl Default for HConfig {
    fn default() -> Self {
        HConfig::Constant(1.0)
    }
}

impl HConfig {
    fn background(&self) -> Background {
        match *self {
            HConfig::Constant(c) => Background::Constant(c),
            HConfig::Affine { constant, linear } if linear == [0.0; 3] => Background::Constant(constant),
            HConfig::Affine { constant, linear } => Background::Affine { constant, linear },
        }
    }

    /// Minimum over the unit sphere or disk.
    fn minimum(&self, kind: SurfaceKind) -> f64 {
        match *self {
            HConfig::Constant(c) => c,
            HConfig::Affine { constant, linear } => {
                let l = match kind {
                    SurfaceKind::ClosedSphere => linear,
                    SurfaceKind::UnitDisk => [linear[0], linear[1], 0.0],
                };
                constant - (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt()
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundConfig {
    #[serde(default)]
    pub h1: HConfig,
    #[serde(default)]
    pub h2: HConfig,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitChoice {
    #[default]
    Zero,
    /// Uniform noise of amplitude `init_amplitude`, drawn from the seed.
    Random,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub init: InitChoice,
    pub init_amplitude: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            grad_tol: 1e-8,
            armijo_c: 1e-4,
            backtrack: 0.5,
            init: InitChoice::Zero,
            init_amplitude: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub rho1: [f64; 2],
    pub rho2: [f64; 2],
    pub steps: [usize; 2],
}

/// `zeta = (x1, x2, t)` with either a fixed `t` or `t = t_times_lambda / lambda`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub x1: usize,
    pub x2: usize,
    pub t: Option<f64>,
    pub t_times_lambda: Option<f64>,
}

impl FamilyConfig {
    pub fn family(&self) -> BubbleFamily {
        let t = match (self.t, self.t_times_lambda) {
            (_, Some(c)) => TSchedule::InverseLambda(c),
            (t, None) => TSchedule::Fixed(t.unwrap_or(0.0)),
        };
        BubbleFamily { x1: self.x1, x2: self.x2, t }
    }
}

/// `lambda = 2^k` for `k` in `log2_lambda[0] ..= log2_lambda[1]`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BubbleConfig {
    pub families: Vec<FamilyConfig>,
    pub log2_lambda: [i32; 2],
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub families: Vec<FamilyConfig>,
    pub log2_lambda: [i32; 2],
    pub rho_grid: Vec<[f64; 2]>,
}

pub fn lambda_sweep([lo, hi]: [i32; 2]) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(k)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldSource {
    Solve,
    Bubble,
    File,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BubblePointConfig {
    pub x1: usize,
    pub x2: usize,
    pub t: f64,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationSection {
    pub delta: f64,
    pub tau: Option<f64>,
    pub delta_prime: Option<f64>,
    pub source: FieldSource,
    pub bubble: Option<BubblePointConfig>,
    /// Field CSV (`vertex_id,u1,u2`), relative to the working directory.
    pub field: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BettiConfig {
    /// `(M1, M2, M3)`; derived from `rho` and the singular points when absent.
    pub m: Option<[usize; 3]>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub units: Units,
    pub seed: Option<u64>,
    pub surface: SurfaceConfig,
    #[serde(default, rename = "singular")]
    pub singulars: Vec<SingularConfig>,
    pub rho: Option<[f64; 2]>,
    #[serde(default)]
    pub background: BackgroundConfig,
    #[serde(default)]
    pub solve: SolveConfig,
    pub scan: Option<ScanConfig>,
    pub bubble: Option<BubbleConfig>,
    pub probe: Option<ProbeConfig>,
    pub concentration: Option<ConcentrationSection>,
    pub betti: Option<BettiConfig>,
}

/// Parses TOML; a schema violation comes back with its key path.
pub fn parse_config(text: &str) -> Result<RunConfig, Diagnostic> {
    let de = toml::Deserializer::parse(text).map_err(|e| Diagnostic::new("", e.to_string().trim_end().to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        Diagnostic::new(if path == "." { String::new() } else { path }, inner.trim_end().to_string())
    })
}

impl RunConfig {
    pub fn kind(&self) -> SurfaceKind {
        match self.surface.kind {
            SurfaceChoice::Sphere => SurfaceKind::ClosedSphere,
            SurfaceChoice::Disk => SurfaceKind::UnitDisk,
        }
    }

    /// Position of singular point `k` on the surface.
    pub fn position(&self, k: usize) -> Point {
        let [a, b] = self.singulars[k].at;
        match self.kind() {
            SurfaceKind::ClosedSphere => [a.sin() * b.cos(), a.sin() * b.sin(), a.cos()],
            SurfaceKind::UnitDisk => [a, b, 0.0],
        }
    }

    pub fn positions(&self) -> Vec<Point> {
        (0..self.singulars.len()).map(|k| self.position(k)).collect()
    }

    pub fn alphas(&self) -> Vec<[f64; 2]> {
        self.singulars.iter().map(|s| s.alpha).collect()
    }

    /// `rho` in absolute units.
    pub fn rho(&self) -> Option<[f64; 2]> {
        self.rho.map(|r| self.scaled(r))
    }

    pub fn scaled(&self, r: [f64; 2]) -> [f64; 2] {
        let s = self.units.scale();
        [r[0] * s, r[1] * s]
    }

    pub fn backgrounds(&self) -> [Background; 2] {
        [self.background.h1.background(), self.background.h2.background()]
    }

    pub fn params(&self, rho: [f64; 2]) -> Result<ProblemParams, crate::fields::FieldError> {
        let singulars = self
            .singulars
            .iter()
            .enumerate()
            .map(|(id, s)| SingularPoint { id, position: self.position(id), alpha: s.alpha })
            .collect();
        ProblemParams::new(rho, singulars, self.backgrounds())
    }

    pub fn mesh(&self) -> Result<SurfaceMesh, crate::mesh::MeshError> {
        let pts = self.positions();
        let s = &self.surface;
        match (self.kind(), s.refine) {
            (SurfaceKind::ClosedSphere, Some(r)) => {
                build_sphere(s.resolution, &pts, Some(SphereGrading { ratio: r.ratio, min_size: r.min_size }))
            }
            (SurfaceKind::ClosedSphere, None) => {
                build_surface_mesh(self.kind(), s.resolution, &pts, s.grading.unwrap_or(1.0))
            }
            (SurfaceKind::UnitDisk, _) => {
                let alphas: Vec<f64> = self.singulars.iter().flat_map(|p| p.alpha).collect();
                build_disk(s.resolution, &pts, s.grading.unwrap_or_else(|| default_disk_grading(&alphas)))
            }
        }
    }

    /// Geometric setting for the classification commands.
    pub fn configuration(&self) -> Configuration {
        let pts = self.positions();
        let antipodal = self.kind() == SurfaceKind::ClosedSphere
            && pts.len() == 2
            && (0..3).all(|k| (pts[0][k] + pts[1][k]).abs() < 1e-9);
        let [h1, h2] = self.backgrounds();
        Configuration {
            kind: self.kind(),
            alphas: self.alphas(),
            antipodal,
            constant_background: h1.is_constant() && h2.is_constant(),
        }
    }

    /// Semantic checks beyond the schema. Empty when the config is usable.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut bad = |path: String, msg: String| out.push(Diagnostic::new(path, msg));
        let kind = self.kind();
        let s = &self.surface;
        let (min_res, max_res) = match kind {
            SurfaceKind::ClosedSphere => (1, 8),
            SurfaceKind::UnitDisk => (3, 4096),
        };
        if !(min_res..=max_res).contains(&s.resolution) {
            bad("surface.resolution".into(), format!("must lie in [{min_res}, {max_res}], got {}", s.resolution));
        }
        if let Some(g) = s.grading {
            if !(g.is_finite() && g >= 1.0) {
                bad("surface.grading".into(), format!("must be a finite number >= 1, got {g}"));
            }
        }
        if let Some(r) = s.refine {
            if kind != SurfaceKind::ClosedSphere {
                bad("surface.refine".into(), "explicit refinement applies to the sphere only".into());
            }
            if !(r.ratio > 0.0 && r.ratio < 1.0) {
                bad("surface.refine.ratio".into(), format!("must lie in (0, 1), got {}", r.ratio));
            }
            if !(r.min_size > 0.0 && r.min_size.is_finite()) {
                bad("surface.refine.min_size".into(), format!("must be positive, got {}", r.min_size));
            }
        }
        if kind == SurfaceKind::UnitDisk && s.weights == Some(WeightChoice::Green) {
            bad("surface.weights".into(), "green weights need the sphere".into());
        }

        for (k, p) in self.singulars.iter().enumerate() {
            for i in 0..2 {
                if !(p.alpha[i] > -1.0 && p.alpha[i].is_finite()) {
                    bad(
                        format!("singular[{k}].alpha[{i}]"),
                        format!("constraint α_{{im}} > −1 violated: α_{}{} = {}", i + 1, k + 1, p.alpha[i]),
                    );
                }
            }
            match kind {
                SurfaceKind::ClosedSphere => {
                    if !(0.0..=PI).contains(&p.at[0]) || !p.at[1].is_finite() {
                        bad(format!("singular[{k}].at"), format!("colatitude must lie in [0, pi], got {:?}", p.at));
                    }
                }
                SurfaceKind::UnitDisk => {
                    if p.at != [0.0, 0.0] {
                        bad(format!("singular[{k}].at"), "the disk carries its singular point at the origin".into());
                    }
                }
            }
        }
        if kind == SurfaceKind::UnitDisk && self.singulars.len() > 1 {
            bad("singular".into(), format!("the disk takes at most one singular point, got {}", self.singulars.len()));
        }
        if kind == SurfaceKind::ClosedSphere && (min_res..=max_res).contains(&s.resolution) {
            let pts = self.positions();
            let min_sep = 2.0 * nominal_edge(kind, s.resolution);
            for a in 0..pts.len() {
                for b in a + 1..pts.len() {
                    let d = geodesic_distance(kind, &pts[a], &pts[b]);
                    if d < 1e-12 {
                        bad(format!("singular[{b}].at"), format!("singular points {a} and {b} coincide"));
                    } else if d < min_sep {
                        bad(
                            format!("singular[{b}].at"),
                            format!("singular points {a} and {b} are {d:.3e} apart, below twice the mesh edge {min_sep:.3e}"),
                        );
                    }
                }
            }
        }

        if let Some(rho) = self.rho {
            for (i, r) in rho.into_iter().enumerate() {
                if !(r > 0.0 && r.is_finite()) {
                    bad(format!("rho[{i}]"), format!("constraint ρ_i > 0 violated: {r}"));
                }
            }
        }
        for (name, h) in [("h1", &self.background.h1), ("h2", &self.background.h2)] {
            let m = h.minimum(kind);
            if !(m > 0.0 && m.is_finite()) {
                bad(format!("background.{name}"), format!("must be positive on the surface, minimum is {m}"));
            }
        }

        let sv = &self.solve;
        if sv.max_iters == 0 {
            bad("solve.max_iters".into(), "must be positive".into());
        }
        if !(sv.grad_tol > 0.0) {
            bad("solve.grad_tol".into(), format!("must be positive, got {}", sv.grad_tol));
        }
        if !(sv.armijo_c > 0.0 && sv.armijo_c < 1.0) {
            bad("solve.armijo_c".into(), format!("must lie in (0, 1), got {}", sv.armijo_c));
        }
        if !(sv.backtrack > 0.0 && sv.backtrack < 1.0) {
            bad("solve.backtrack".into(), format!("must lie in (0, 1), got {}", sv.backtrack));
        }
        if !(sv.init_amplitude >= 0.0 && sv.init_amplitude.is_finite()) {
            bad("solve.init_amplitude".into(), format!("must be non-negative, got {}", sv.init_amplitude));
        }

        if let Some(sc) = &self.scan {
            for (name, r) in [("rho1", sc.rho1), ("rho2", sc.rho2)] {
                if !(r[0] >= 0.0 && r[0] < r[1] && r[1].is_finite()) {
                    bad(format!("scan.{name}"), format!("need 0 <= lo < hi, got {r:?}"));
                }
            }
            if sc.steps.iter().any(|&n| n < 2) {
                bad("scan.steps".into(), format!("need at least 2 steps per axis, got {:?}", sc.steps));
            }
        }
        let n = self.singulars.len();
        let check_families = |section: &str, families: &[FamilyConfig], range: [i32; 2], out: &mut Vec<Diagnostic>| {
            if families.is_empty() {
                out.push(Diagnostic::new(format!("{section}.families"), "at least one family is needed"));
            }
            for (k, f) in families.iter().enumerate() {
                let path = format!("{section}.families[{k}]");
                if f.x1 >= n || f.x2 >= n {
                    out.push(Diagnostic::new(
                        &path,
                        format!("centres ({}, {}) must index the {n} singular points", f.x1, f.x2),
                    ));
                }
                match (f.t, f.t_times_lambda) {
                    (Some(_), Some(_)) => out.push(Diagnostic::new(&path, "give either t or t_times_lambda, not both")),
                    (Some(t), None) if !(0.0..=1.0).contains(&t) => {
                        out.push(Diagnostic::new(format!("{path}.t"), format!("must lie in [0, 1], got {t}")))
                    }
                    (None, Some(c)) if !(c > 0.0 && c.is_finite()) => out
                        .push(Diagnostic::new(format!("{path}.t_times_lambda"), format!("must be positive, got {c}"))),
                    _ => {}
                }
            }
            if !(range[0] < range[1] && range[0] >= 0 && range[1] <= 40) {
                out.push(Diagnostic::new(
                    format!("{section}.log2_lambda"),
                    format!("need 0 <= lo < hi <= 40, got {range:?}"),
                ));
            }
        };
        if let Some(b) = &self.bubble {
            check_families("bubble", &b.families, b.log2_lambda, &mut out);
        }
        if let Some(p) = &self.probe {
            check_families("probe", &p.families, p.log2_lambda, &mut out);
            if p.rho_grid.is_empty() {
                out.push(Diagnostic::new("probe.rho_grid", "at least one rho is needed"));
            }
            for (k, r) in p.rho_grid.iter().enumerate() {
                if !(r[0] > 0.0 && r[1] > 0.0 && r[0].is_finite() && r[1].is_finite()) {
                    out.push(Diagnostic::new(
                        format!("probe.rho_grid[{k}]"),
                        format!("constraint ρ_i > 0 violated: {r:?}"),
                    ));
                }
            }
        }
        if let Some(c) = &self.concentration {
            if !(c.delta > 0.0 && c.delta.is_finite()) {
                out.push(Diagnostic::new("concentration.delta", format!("must be positive, got {}", c.delta)));
            }
            match c.source {
                FieldSource::Bubble => match &c.bubble {
                    None => out.push(Diagnostic::new("concentration.bubble", "required when source = \"bubble\"")),
                    Some(b) => {
                        if b.x1 >= n || b.x2 >= n {
                            out.push(Diagnostic::new(
                                "concentration.bubble",
                                format!("centres must index the {n} singular points"),
                            ));
                        }
                        if !(0.0..=1.0).contains(&b.t) {
                            out.push(Diagnostic::new(
                                "concentration.bubble.t",
                                format!("must lie in [0, 1], got {}", b.t),
                            ));
                        }
                        if !(b.lambda >= 1.0 && b.lambda.is_finite()) {
                            out.push(Diagnostic::new(
                                "concentration.bubble.lambda",
                                format!("must be >= 1, got {}", b.lambda),
                            ));
                        }
                    }
                },
                FieldSource::File if c.field.is_none() => {
                    out.push(Diagnostic::new("concentration.field", "required when source = \"file\""))
                }
                _ => {}
            }
        }
        if let Some(BettiConfig { m: Some(m) }) = self.betti {
            if m[2] > m[0].min(m[1]) {
                out.push(Diagnostic::new("betti.m", format!("need M3 <= min(M1, M2), got {m:?}")));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        [surface]
        kind = "sphere"
        resolution = 3
    "#;

    #[test]
    fn minimal_config_is_valid() {
        let c = parse_config(BASE).unwrap();
        assert!(c.diagnostics().is_empty());
        assert_eq!(c.units, Units::Absolute);
        assert_eq!(c.solve, SolveConfig::default());
    }

    #[test]
    fn unknown_key_reports_path() {
        let e = parse_config(&format!("{BASE}\n[solve]\nmax_iter = 3\n")).unwrap_err();
        assert_eq!(e.path, "solve.max_iter");
        assert!(e.message.contains("max_iter"), "{}", e.message);
    }

    #[test]
    fn bad_alpha_names_constraint() {
        let c = parse_config(&format!("{BASE}\n[[singular]]\nat = [0.0, 0.0]\nalpha = [-1.2, 0.0]\n")).unwrap();
        let d = c.diagnostics();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "singular[0].alpha[0]");
        assert!(d[0].message.contains("α_{im} > −1"));
    }

    #[test]
    fn coincident_points_rejected() {
        let text = format!("{BASE}\n[[singular]]\nat = [1.0, 2.0]\nalpha = [-0.5, 0.0]\n[[singular]]\nat = [1.0, 2.0]\nalpha = [0.0, -0.5]\n");
        let d = parse_config(&text).unwrap().diagnostics();
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("coincide"));
    }

    #[test]
    fn units_and_positions() {
        let text = format!("units = \"4pi\"\nrho = [0.5, 0.25]\n{BASE}\n[[singular]]\nat = [3.141592653589793, 0.0]\nalpha = [-0.5, -0.5]\n");
        let c = parse_config(&text).unwrap();
        let r = c.rho().unwrap();
        assert!((r[0] - 2.0 * PI).abs() < 1e-12 && (r[1] - PI).abs() < 1e-12);
        assert!((c.position(0)[2] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn affine_background_positivity() {
        let text = format!("{BASE}\n[background]\nh1 = {{ constant = 1.0, linear = [0.6, 0.8, 0.0] }}\n");
        let d = parse_config(&text).unwrap().diagnostics();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "background.h1");
    }
}
