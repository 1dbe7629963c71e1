//! Truncated bubble profiles, the test-function families `Phi^lambda` over the
//! punctured join, and log-lambda asymptotics of their energy terms.

mod predict;
mod report;

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::fields::{FieldError, PairField, ProblemParams};
use crate::mesh::{MeshError, Point, SurfaceKind, SurfaceMesh};

pub use predict::{predict, Prediction, Variant};
pub use report::{
    asymptotic_report, fit_slope, write_points_csv, write_report_csv, write_report_svg, AsymptoticReport, BubbleFamily,
    LambdaPoint, SlopeRow, TSchedule,
};

#[derive(Debug, Error)]
pub enum BubbleError {
    #[error("lambda must exceed 2, got {0}")]
    Lambda(f64),
    #[error("join parameter t must lie in [0, 1], got {0}")]
    JoinParameter(f64),
    #[error("(p{0}, p{0}, 1/2) is the punctured midpoint and not part of the join")]
    Punctured(usize),
    #[error("singular point {id} is not in the barycenter set of component {component}")]
    NotBarycenter { id: usize, component: usize },
    #[error("unknown singular point {0}")]
    UnknownSingular(usize),
    #[error("rho_{component} = {rho} lies on the regime threshold of p{id}")]
    OnThreshold { id: usize, component: usize, rho: f64 },
    #[error("bubbles need a closed surface")]
    NotClosed,
    #[error("degenerate fit: {0}")]
    Fit(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

pub type Result<T, E = BubbleError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProfileKind {
    /// `-2 log max{1, (lambda d)^(2(1+alpha))}`.
    Standard,
    /// `-2 log max{1, (lambda d)^(2(2+alpha1+alpha2))}`.
    Prime,
    /// `-2 log max{1, lambda^(2(2+alpha1+alpha2)) d^(2(1+alpha1))}`.
    DoublePrime,
}

/// Position of the two bubble centres relative to the thresholds `4 pi (2 + alpha_1m + alpha_2m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    /// Both `rho_i` below the threshold.
    Low,
    /// `rho_1` below, `rho_2` above.
    LowHigh,
    /// `rho_1` above, `rho_2` below.
    HighLow,
    /// Both above.
    High,
    TwoPoint,
}

impl Regime {
    pub fn symbol(self) -> &'static str {
        match self {
            Regime::Low => "<<",
            Regime::LowHigh => "<>",
            Regime::HighLow => "><",
            Regime::High => ">>",
            Regime::TwoPoint => "two-point",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A point `zeta = (x1, x2, t)` of the join at scale `lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BubbleSpec {
    pub x1: usize,
    pub x2: usize,
    pub t: f64,
    pub lambda: f64,
}

/// `(1 + alpha_1m, 1 + alpha_2m)` of a singular point.
fn weights_of(params: &ProblemParams, id: usize) -> Result<[f64; 2]> {
    params
        .singulars
        .iter()
        .find(|s| s.id == id)
        .map(|s| [1.0 + s.alpha[0], 1.0 + s.alpha[1]])
        .ok_or(BubbleError::UnknownSingular(id))
}

/// Regime of a single bubble centre.
pub fn point_regime(params: &ProblemParams, id: usize) -> Result<Regime> {
    let [a, b] = weights_of(params, id)?;
    let threshold = 4.0 * PI * (a + b);
    let mut above = [false; 2];
    for (i, (&rho, above)) in params.rho.iter().zip(&mut above).enumerate() {
        if rho == threshold {
            return Err(BubbleError::OnThreshold { id, component: i + 1, rho });
        }
        *above = rho > threshold;
    }
    Ok(match above {
        [false, false] => Regime::Low,
        [false, true] => Regime::LowHigh,
        [true, false] => Regime::HighLow,
        [true, true] => Regime::High,
    })
}

impl BubbleSpec {
    pub fn regime(&self, params: &ProblemParams) -> Result<Regime> {
        if self.x1 != self.x2 {
            return Ok(Regime::TwoPoint);
        }
        point_regime(params, self.x1)
    }

    /// Checks `lambda > 2`, `t` in `[0, 1]`, barycenter membership and the puncture.
    pub fn validate(&self, params: &ProblemParams) -> Result<Regime> {
        if !(self.lambda > 2.0 && self.lambda.is_finite()) {
            return Err(BubbleError::Lambda(self.lambda));
        }
        if !(0.0..=1.0).contains(&self.t) {
            return Err(BubbleError::JoinParameter(self.t));
        }
        for (component, id) in [(0, self.x1), (1, self.x2)] {
            let w = weights_of(params, id)?;
            if !(4.0 * PI * w[component] < params.rho[component]) {
                return Err(BubbleError::NotBarycenter { id, component: component + 1 });
            }
        }
        let regime = self.regime(params)?;
        if regime == Regime::Low && self.t == 0.5 {
            return Err(BubbleError::Punctured(self.x1));
        }
        Ok(regime)
    }
}

/// `-2 max{0, e}` where `e` is the log of the argument of `max{1, .}`.
fn truncated(e: f64) -> f64 {
    -2.0 * e.max(0.0)
}

fn pos_log(x: f64) -> f64 {
    x.ln().max(0.0)
}

fn centre(mesh: &SurfaceMesh, id: usize) -> Result<Point> {
    Ok(mesh.vertices()[mesh.singular_vertex(id)?])
}

/// Pointwise profile at every vertex, using exact surface distance to singular point `p`.
pub fn bubble_profile(
    mesh: &SurfaceMesh,
    kind: ProfileKind,
    p: usize,
    alpha: [f64; 2],
    lambda: f64,
) -> Result<Vec<f64>> {
    if !(lambda > 2.0 && lambda.is_finite()) {
        return Err(BubbleError::Lambda(lambda));
    }
    let c = centre(mesh, p)?;
    let (a, s) = (1.0 + alpha[0], 2.0 + alpha[0] + alpha[1]);
    let ll = lambda.ln();
    Ok((0..mesh.num_vertices())
        .map(|v| {
            let ld = mesh.distance(v, &c).ln();
            truncated(match kind {
                ProfileKind::Standard => 2.0 * a * (ll + ld),
                ProfileKind::Prime => 2.0 * s * (ll + ld),
                ProfileKind::DoublePrime => 2.0 * s * ll + 2.0 * a * ld,
            })
        })
        .collect())
}

/// `(phi_1, phi_2)` of the one-point map at `p` in the given regime.
fn one_point(
    mesh: &SurfaceMesh,
    p: usize,
    [a, b]: [f64; 2],
    regime: Regime,
    lambda: f64,
    t: f64,
) -> Result<[Vec<f64>; 2]> {
    let c = centre(mesh, p)?;
    let n = mesh.num_vertices();
    let s = a + b;
    let ll = lambda.ln();
    let (lt, l1) = (pos_log(lambda * t), pos_log(lambda * (1.0 - t)));
    let mut out = [vec![0.0; n], vec![0.0; n]];
    if lambda <= 1.0 {
        return Ok(out);
    }
    let [o1, o2] = &mut out;
    for (v, (o1, o2)) in o1.iter_mut().zip(o2.iter_mut()).enumerate() {
        let ld = mesh.distance(v, &c).ln();
        let (f1, f2) = match regime {
            Regime::Low if t < 0.5 => (truncated(2.0 * a * (ll + ld)), 0.0),
            Regime::Low => (0.0, truncated(2.0 * b * (ll + ld))),
            Regime::LowHigh => {
                (truncated(2.0 * b * lt + 2.0 * a * (ll + ld)), truncated(2.0 * s * ((lambda * t).ln() + ld)))
            }
            Regime::HighLow => {
                (truncated(2.0 * s * ((lambda * (1.0 - t)).ln() + ld)), truncated(2.0 * a * l1 + 2.0 * b * (ll + ld)))
            }
            Regime::High => {
                let k1 = ll + lt - l1;
                let k2 = ll + l1 - lt;
                let prime = 2.0 * s * (ll + ld);
                (truncated((s * k1 + 2.0 * a * ld).max(prime)), truncated((s * k2 + 2.0 * b * ld).max(prime)))
            }
            Regime::TwoPoint => unreachable!("one-point regimes only"),
        };
        *o1 = f1;
        *o2 = f2;
    }
    Ok(out)
}

/// Raw `(phi_1, phi_2)` for `spec`; the two-point map is the sum of the one-point
/// maps `Phi^(lambda (1-t))(x1, x1, 0)` and `Phi^(lambda t)(x2, x2, 1)`.
pub fn phi_components(mesh: &SurfaceMesh, spec: &BubbleSpec, params: &ProblemParams) -> Result<[Vec<f64>; 2]> {
    if mesh.kind() != SurfaceKind::ClosedSphere {
        return Err(BubbleError::NotClosed);
    }
    let regime = spec.validate(params)?;
    if regime != Regime::TwoPoint {
        return one_point(mesh, spec.x1, weights_of(params, spec.x1)?, regime, spec.lambda, spec.t);
    }
    let r1 = point_regime(params, spec.x1)?;
    let r2 = point_regime(params, spec.x2)?;
    let [p1, p2] = one_point(mesh, spec.x1, weights_of(params, spec.x1)?, r1, spec.lambda * (1.0 - spec.t), 0.0)?;
    let [q1, q2] = one_point(mesh, spec.x2, weights_of(params, spec.x2)?, r2, spec.lambda * spec.t, 1.0)?;
    let add = |x: Vec<f64>, y: Vec<f64>| x.into_iter().zip(y).map(|(a, b)| a + b).collect::<Vec<_>>();
    Ok([add(p1, q1), add(p2, q2)])
}

/// `(phi_1 - phi_2 / 2, phi_2 - phi_1 / 2)` before the gauge projection.
pub fn combine([f1, f2]: &[Vec<f64>; 2]) -> [Vec<f64>; 2] {
    let u1 = f1.iter().zip(f2).map(|(a, b)| a - b / 2.0).collect();
    let u2 = f2.iter().zip(f1).map(|(a, b)| a - b / 2.0).collect();
    [u1, u2]
}

/// `Phi^lambda(zeta)` projected to zero mean.
pub fn phi_map(mesh: &SurfaceMesh, spec: &BubbleSpec, params: &ProblemParams) -> Result<PairField> {
    let [u1, u2] = combine(&phi_components(mesh, spec, params)?);
    Ok(PairField::projected(mesh, u1, u2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::SingularPoint;
    use crate::mesh::build_surface_mesh;

    const N: Point = [0.0, 0.0, 1.0];
    const S: Point = [0.0, 0.0, -1.0];

    fn setup(alpha: [f64; 2], rho: [f64; 2]) -> (SurfaceMesh, ProblemParams) {
        let mesh = build_surface_mesh(SurfaceKind::ClosedSphere, 3, &[N, S], 1.0).unwrap();
        let sing = vec![SingularPoint { id: 0, position: N, alpha }, SingularPoint { id: 1, position: S, alpha }];
        (mesh, ProblemParams::uniform(rho, sing).unwrap())
    }

    #[test]
    fn standard_profile_values() {
        let (mesh, _) = setup([0.0, 0.0], [1.0, 1.0]);
        let lambda = 10.0;
        let phi = bubble_profile(&mesh, ProfileKind::Standard, 0, [0.0, 0.0], lambda).unwrap();
        for (v, f) in phi.iter().enumerate() {
            let d = mesh.distance(v, &N);
            if lambda * d <= 1.0 {
                assert_eq!(*f, 0.0);
            } else {
                assert!((f + 4.0 * (lambda * d).ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn low_regime_second_component() {
        let (mesh, params) = setup([-0.5, -0.5], [3.0 * PI, 3.0 * PI]);
        let spec = BubbleSpec { x1: 0, x2: 0, t: 0.2, lambda: 50.0 };
        assert_eq!(spec.regime(&params).unwrap(), Regime::Low);
        let [f1, f2] = phi_components(&mesh, &spec, &params).unwrap();
        assert!(f2.iter().all(|&x| x == 0.0));
        let [_, u2] = combine(&[f1.clone(), f2]);
        assert!(u2.iter().zip(&f1).all(|(u, f)| *u == -f / 2.0));
        let u = phi_map(&mesh, &spec, &params).unwrap();
        assert!(u.gauge_violation(&mesh) < 1e-12);
    }

    #[test]
    fn puncture_and_membership() {
        let (mesh, params) = setup([-0.5, -0.5], [3.0 * PI, 3.0 * PI]);
        let mid = BubbleSpec { x1: 1, x2: 1, t: 0.5, lambda: 8.0 };
        assert!(matches!(phi_map(&mesh, &mid, &params), Err(BubbleError::Punctured(1))));
        let (_, low) = setup([-0.5, -0.5], [PI, PI]);
        let spec = BubbleSpec { x1: 0, x2: 1, t: 0.3, lambda: 8.0 };
        assert!(matches!(spec.validate(&low), Err(BubbleError::NotBarycenter { .. })));
    }

    #[test]
    fn two_point_endpoints() {
        let (mesh, params) = setup([-0.5, -0.5], [3.0 * PI, 3.0 * PI]);
        let lambda = 64.0;
        let two = phi_map(&mesh, &BubbleSpec { x1: 0, x2: 1, t: 0.0, lambda }, &params).unwrap();
        let one = phi_map(&mesh, &BubbleSpec { x1: 0, x2: 0, t: 0.0, lambda }, &params).unwrap();
        assert_eq!(two, one);
        let near = phi_map(&mesh, &BubbleSpec { x1: 0, x2: 1, t: 1e-9, lambda }, &params).unwrap();
        let diff = near.axpy(-1.0, &one).max_abs();
        assert!(diff < 1e-8, "{diff}");
        let end = phi_map(&mesh, &BubbleSpec { x1: 0, x2: 1, t: 1.0 - 1e-9, lambda }, &params).unwrap();
        let other = phi_map(&mesh, &BubbleSpec { x1: 1, x2: 1, t: 1.0, lambda }, &params).unwrap();
        assert!(end.axpy(-1.0, &other).max_abs() < 1e-8);
    }

    #[test]
    fn regimes_by_threshold() {
        let (_, p) = setup([-0.25, -0.25], [4.0 * PI, 7.0 * PI]);
        assert_eq!(point_regime(&p, 0).unwrap(), Regime::LowHigh);
        assert_eq!(point_regime(&p.with_rho([7.0 * PI, 4.0 * PI]), 0).unwrap(), Regime::HighLow);
        assert_eq!(point_regime(&p.with_rho([7.0 * PI, 7.0 * PI]), 0).unwrap(), Regime::High);
        assert!(matches!(point_regime(&p.with_rho([6.0 * PI, 1.0]), 0), Err(BubbleError::OnThreshold { .. })));
    }
}
