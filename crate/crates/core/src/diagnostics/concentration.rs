use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, Result};
use crate::fields::{density, EffectiveWeights, PairField, ProblemParams};
use crate::mesh::{Point, SurfaceMesh};

const NORMALIZATION_TOL: f64 = 1e-9;
const BISECTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationConfig {
    /// Ball radius around each candidate centre.
    pub delta: f64,
    /// Mass fraction defining the concentration scale, in `(1/2, 1)`.
    pub tau: f64,
    /// Threshold scale of the join projection, in `(0, delta)`.
    pub delta_prime: f64,
}

impl ConcentrationConfig {
    /// `tau = 0.75`, `delta' = delta / 8`.
    pub fn with_delta(delta: f64) -> Self {
        Self { delta, tau: 0.75, delta_prime: delta / 8.0 }
    }

    /// Checks the ranges and that `delta` is at most half the distance between any two centres.
    pub fn validate(&self, mesh: &SurfaceMesh, centres: &[usize]) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(DiagnosticsError::Config(format!("delta = {} must be positive", self.delta)));
        }
        if !(self.tau > 0.5 && self.tau < 1.0) {
            return Err(DiagnosticsError::Config(format!("tau = {} must lie in (1/2, 1)", self.tau)));
        }
        if !(self.delta_prime > 0.0 && self.delta_prime < self.delta) {
            return Err(DiagnosticsError::Config(format!(
                "delta' = {} must lie in (0, delta = {})",
                self.delta_prime, self.delta
            )));
        }
        let pts = positions(mesh, centres)?;
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let d = mesh.distance(mesh.singular_vertex(centres[b])?, &pts[a]);
                if self.delta > d / 2.0 {
                    return Err(DiagnosticsError::Config(format!(
                        "delta = {} exceeds half the distance {d:.6} between p{} and p{}",
                        self.delta, centres[a], centres[b]
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConcentrationBranch {
    /// Most mass lies away from every centre.
    Spread,
    /// The two largest ball masses are comparable.
    Balanced,
    /// Concentrated, with the scale interpolated toward `delta`.
    Interpolated,
    Concentrated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationState {
    /// Centre of mass; `None` exactly when `sigma = delta`.
    pub beta: Option<usize>,
    pub sigma: f64,
    pub branch: ConcentrationBranch,
    /// Radius holding mass `tau` around `beta`, when defined.
    pub scale: Option<f64>,
    /// Mass within `delta` of each centre.
    pub ball_masses: BTreeMap<usize, f64>,
    /// Mass away from all balls.
    pub outside: f64,
}

fn positions(mesh: &SurfaceMesh, ids: &[usize]) -> Result<Vec<Point>> {
    ids.iter().map(|&id| Ok(mesh.vertices()[mesh.singular_vertex(id)?])).collect()
}

/// Piecewise-linear cumulative mass around a centre, as a function of the radius.
struct RadialMass {
    radii: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RadialMass {
    fn new(mesh: &SurfaceMesh, masses: &[f64], centre: &Point) -> Self {
        let mut pairs: Vec<(f64, f64)> =
            (0..mesh.num_vertices()).map(|v| (mesh.distance(v, centre), masses[v])).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // The centre's own mass sits at half the nearest positive distance.
        let first = pairs.iter().map(|p| p.0).find(|&d| d > 0.0).unwrap_or(1.0);
        let mut radii = Vec::with_capacity(pairs.len());
        let mut cumulative = Vec::with_capacity(pairs.len());
        let mut total = 0.0;
        for (d, m) in pairs {
            total += m;
            radii.push(if d > 0.0 { d } else { first / 2.0 });
            cumulative.push(total);
        }
        Self { radii, cumulative }
    }

    fn at(&self, r: f64) -> f64 {
        let j = self.radii.partition_point(|&d| d <= r);
        if j == self.radii.len() {
            return *self.cumulative.last().unwrap_or(&0.0);
        }
        let (r0, c0) = if j == 0 { (0.0, 0.0) } else { (self.radii[j - 1], self.cumulative[j - 1]) };
        let (r1, c1) = (self.radii[j], self.cumulative[j]);
        if r1 > r0 {
            c0 + (c1 - c0) * (r - r0) / (r1 - r0)
        } else {
            c1
        }
    }

    /// Smallest radius in `[0, hi]` with cumulative mass `target`.
    fn invert(&self, target: f64, hi: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, hi);
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if self.at(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Centre and scale of concentration of the vertex masses `masses` (summing
/// to one) with respect to the candidate centres `centres` (singular ids).
pub fn concentration(
    mesh: &SurfaceMesh,
    masses: &[f64],
    centres: &[usize],
    cfg: &ConcentrationConfig,
) -> Result<ConcentrationState> {
    if masses.len() != mesh.num_vertices() {
        return Err(DiagnosticsError::Config(format!("{} masses for {} vertices", masses.len(), mesh.num_vertices())));
    }
    if let Some(v) = masses.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(DiagnosticsError::BadDensity(v));
    }
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(DiagnosticsError::NotNormalized(total));
    }
    cfg.validate(mesh, centres)?;
    let mut ids = centres.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let pts = positions(mesh, &ids)?;
    let ball: Vec<f64> = pts
        .iter()
        .map(|c| (0..mesh.num_vertices()).filter(|&v| mesh.distance(v, c) < cfg.delta).map(|v| masses[v]).sum())
        .collect();
    let outside = 1.0 - ball.iter().sum::<f64>();
    let ball_masses: BTreeMap<usize, f64> = ids.iter().copied().zip(ball.iter().copied()).collect();
    let spread = |branch| ConcentrationState {
        beta: None,
        sigma: cfg.delta,
        branch,
        scale: None,
        ball_masses: ball_masses.clone(),
        outside,
    };

    // Slot 0 is the outside mass, so ties go to the lowest index.
    let all: Vec<f64> = std::iter::once(outside).chain(ball.iter().copied()).collect();
    let first_max = |skip: Option<usize>| {
        (0..all.len()).filter(|&k| Some(k) != skip).fold(None, |best: Option<usize>, k| match best {
            Some(b) if all[b] >= all[k] => Some(b),
            _ => Some(k),
        })
    };
    let top = first_max(None).unwrap_or(0);
    if top == 0 {
        return Ok(spread(ConcentrationBranch::Spread));
    }
    let second = all[first_max(Some(top)).unwrap_or(0)];
    let k = ids.len() as f64;
    let ratio = k * cfg.tau / (1.0 - cfg.tau);
    let mass = all[top];
    if mass <= ratio * second {
        return Ok(spread(ConcentrationBranch::Balanced));
    }
    let centre = &pts[top - 1];
    let s = RadialMass::new(mesh, masses, centre).invert(cfg.tau, cfg.delta);
    let (sigma, branch) = if mass <= 2.0 * ratio * second {
        (s + (2.0 - mass / (ratio * second)) * (cfg.delta - s), ConcentrationBranch::Interpolated)
    } else {
        (s, ConcentrationBranch::Concentrated)
    };
    Ok(ConcentrationState { beta: Some(ids[top - 1]), sigma, branch, scale: Some(s), ball_masses, outside })
}

/// Singular points whose threshold `4 pi (1 + alpha_im)` lies below `rho_i`.
pub fn barycenter_ids(params: &ProblemParams, i: usize) -> Vec<usize> {
    params.singulars.iter().filter(|s| 4.0 * PI * (1.0 + s.alpha[i]) < params.rho[i]).map(|s| s.id).collect()
}

/// Join parameter from the two scales. The flag is set when both scales are at
/// least `delta'`, where the value `0` is returned by precedence.
pub fn t_prime([s1, s2]: [f64; 2], delta_prime: f64) -> (f64, bool) {
    if s2 >= delta_prime {
        (0.0, s1 >= delta_prime)
    } else if s1 >= delta_prime {
        (1.0, false)
    } else {
        ((delta_prime - s2) / (2.0 * delta_prime - s1 - s2), false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JoinProjection {
    pub beta: [Option<usize>; 2],
    pub sigma: [f64; 2],
    pub t_prime: f64,
    /// Both scales reached `delta'`; `t_prime` is the boundary value `0`.
    pub flagged: bool,
    pub states: [ConcentrationState; 2],
}

/// `(beta_1, beta_2, t')` of a pair field, from the concentration of each
/// normalized density `f_i` around the barycenter set of component `i`.
pub fn join_projection(
    mesh: &SurfaceMesh,
    weights: &EffectiveWeights,
    params: &ProblemParams,
    u: &PairField,
    cfg: &ConcentrationConfig,
) -> Result<JoinProjection> {
    let states: [ConcentrationState; 2] = [0, 1]
        .map(|i| -> Result<ConcentrationState> {
            let f = density(mesh, weights, u, i)?;
            concentration(mesh, &f.masses, &barycenter_ids(params, i), cfg)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .try_into()
        .expect("two components");
    let sigma = [states[0].sigma, states[1].sigma];
    let (t, flagged) = t_prime(sigma, cfg.delta_prime);
    Ok(JoinProjection { beta: [states[0].beta, states[1].beta], sigma, t_prime: t, flagged, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::SingularPoint;
    use crate::mesh::{build_surface_mesh, SurfaceKind};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const N: Point = [0.0, 0.0, 1.0];
    const S: Point = [0.0, 0.0, -1.0];

    fn sphere() -> SurfaceMesh {
        build_surface_mesh(SurfaceKind::ClosedSphere, 4, &[N, S], 1.0).unwrap()
    }

    fn normalized(mut m: Vec<f64>) -> Vec<f64> {
        let s: f64 = m.iter().sum();
        m.iter_mut().for_each(|x| *x /= s);
        m
    }

    #[test]
    fn uniform_density_is_spread() {
        let mesh = sphere();
        let m = mesh.vertex_areas().to_vec();
        let st = concentration(&mesh, &m, &[0, 1], &ConcentrationConfig::with_delta(0.1)).unwrap();
        assert_eq!(st.branch, ConcentrationBranch::Spread);
        assert_eq!(st.beta, None);
        assert_eq!(st.sigma, 0.1);
    }

    #[test]
    fn point_mass_concentrates() {
        let mesh = sphere();
        let v = mesh.singular_vertex(0).unwrap();
        let mut m: Vec<f64> = mesh.vertex_areas().iter().map(|a| 0.1 * a).collect();
        m[v] += 0.9;
        let st = concentration(&mesh, &normalized(m), &[0, 1], &ConcentrationConfig::with_delta(0.2)).unwrap();
        assert_eq!(st.branch, ConcentrationBranch::Concentrated);
        assert_eq!(st.beta, Some(0));
        assert!(st.sigma < 0.01);
    }

    #[test]
    fn interpolated_scale_between_s_and_delta() {
        // I_top = 2.5 * ratio * I_second puts the top mass between one and two ratios.
        let mesh = sphere();
        let cfg = ConcentrationConfig::with_delta(0.2);
        let (vn, vs) = (mesh.singular_vertex(0).unwrap(), mesh.singular_vertex(1).unwrap());
        let mut m = vec![0.0; mesh.num_vertices()];
        m[vn] = 0.9;
        m[vs] = 0.1;
        // ratio = 2 * 0.75 / 0.25 = 6: 0.9 <= 6 * 0.1 fails, 0.9 <= 12 * 0.1 holds.
        let st = concentration(&mesh, &m, &[0, 1], &cfg).unwrap();
        assert_eq!(st.branch, ConcentrationBranch::Interpolated);
        let s = st.scale.unwrap();
        assert!(s < st.sigma && st.sigma < cfg.delta, "{s} {}", st.sigma);
        m[vn] = 0.8;
        m[vs] = 0.2;
        let st = concentration(&mesh, &m, &[0, 1], &cfg).unwrap();
        assert_eq!(st.branch, ConcentrationBranch::Balanced);
    }

    #[test]
    fn rejects_unnormalized_and_bad_config() {
        let mesh = sphere();
        let m = vec![0.0; mesh.num_vertices()];
        assert!(matches!(
            concentration(&mesh, &m, &[0], &ConcentrationConfig::with_delta(0.1)),
            Err(DiagnosticsError::NotNormalized(_))
        ));
        let m = mesh.vertex_areas().to_vec();
        assert!(concentration(&mesh, &m, &[0, 1], &ConcentrationConfig::with_delta(0.6)).is_err());
        let cfg = ConcentrationConfig { delta: 0.1, tau: 0.4, delta_prime: 0.01 };
        assert!(concentration(&mesh, &m, &[0, 1], &cfg).is_err());
    }

    #[test]
    fn branches_partition_random_densities() {
        let mesh = sphere();
        let cfg = ConcentrationConfig::with_delta(0.3);
        let (vn, vs) = (mesh.singular_vertex(0).unwrap(), mesh.singular_vertex(1).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..1000 {
            let mut m: Vec<f64> = mesh.vertex_areas().iter().map(|a| a * rng.random::<f64>()).collect();
            let spread: f64 = m.iter().sum();
            m[vn] += spread * 10f64.powf(rng.random_range(-2.0..2.0));
            m[vs] += spread * 10f64.powf(rng.random_range(-2.0..1.0));
            let st = concentration(&mesh, &normalized(m), &[0, 1], &cfg).unwrap();
            assert_eq!(st.beta.is_none(), st.sigma == cfg.delta);
            assert!(st.sigma > 0.0 && st.sigma <= cfg.delta);
            seen.insert(format!("{:?}", st.branch));
        }
        assert_eq!(seen.len(), 4, "{seen:?}");
    }

    #[test]
    fn t_prime_cases() {
        assert!((t_prime([0.01, 0.01], 0.1).0 - 0.5).abs() < 1e-15);
        assert_eq!(t_prime([0.01, 0.2], 0.1), (0.0, false));
        assert_eq!(t_prime([0.2, 0.01], 0.1), (1.0, false));
        assert_eq!(t_prime([0.2, 0.2], 0.1), (0.0, true));
    }

    proptest! {
        #[test]
        fn t_prime_range_and_monotonicity(s1 in 0.0..0.1f64, s2 in 0.0..0.1f64, e in 1e-6..0.01f64) {
            let dp = 0.1;
            let (t, _) = t_prime([s1, s2], dp);
            prop_assert!((0.0..=1.0).contains(&t));
            if s2 + e < dp {
                prop_assert!(t_prime([s1, s2 + e], dp).0 <= t + 1e-12);
            }
            if s1 + e < dp {
                prop_assert!(t_prime([s1 + e, s2], dp).0 >= t - 1e-12);
            }
        }
    }

    #[test]
    fn barycenter_sets() {
        let s = |id, alpha| SingularPoint { id, position: N, alpha };
        let p = ProblemParams::uniform([3.0 * PI, PI], vec![s(0, [-0.5, -0.5]), s(1, [0.0, -0.9])]).unwrap();
        assert_eq!(barycenter_ids(&p, 0), vec![0]);
        assert_eq!(barycenter_ids(&p, 1), vec![1]);
    }
}
