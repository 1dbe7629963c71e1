use super::{EffectiveWeights, FieldError, PairField, ProblemParams, Result};
use crate::mesh::{Gauge, ScalarField, SurfaceMesh};

/// Largest exponent accepted by [`singular_integral`].
const EXP_LIMIT: f64 = 700.0;

fn check(mesh: &SurfaceMesh, weights: &EffectiveWeights, n: usize) -> Result<()> {
    for len in [n, weights.num_vertices()] {
        if len != mesh.num_vertices() {
            return Err(FieldError::Length { expected: mesh.num_vertices(), got: len });
        }
    }
    Ok(())
}

fn check_gauge(mesh: &SurfaceMesh, u: &PairField) -> Result<()> {
    if u.gauge() != mesh.natural_gauge() {
        return Err(FieldError::GaugeMismatch { gauge: u.gauge(), kind: mesh.kind() });
    }
    Ok(())
}

/// `log int h~_i e^g` by a max-shifted sum; safe for any finite `g`.
pub fn log_integral(weights: &EffectiveWeights, g: &[f64], i: usize) -> Result<f64> {
    let omega = weights.omega(i);
    let max = g.iter().zip(omega).filter(|(_, &w)| w > 0.0).map(|(x, _)| *x).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(FieldError::NonFinite("log integral exponent"));
    }
    let sum: f64 = g.iter().zip(omega).map(|(x, w)| w * (x - max).exp()).sum();
    let out = max + sum.ln();
    if out.is_finite() {
        Ok(out)
    } else {
        Err(FieldError::NonFinite("log integral"))
    }
}

/// `int h~_i e^g`. Rejects `max g > 700`; use [`log_integral`] there.
pub fn singular_integral(mesh: &SurfaceMesh, weights: &EffectiveWeights, g: &[f64], i: usize) -> Result<f64> {
    check(mesh, weights, g.len())?;
    let max = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max > EXP_LIMIT {
        return Err(FieldError::Overflow(max));
    }
    Ok(log_integral(weights, g, i)?.exp())
}

/// `int Q(u) = (u1 S u1 + u1 S u2 + u2 S u2) / 3`.
pub fn q_energy(mesh: &SurfaceMesh, u: &PairField) -> Result<f64> {
    if u.len() != mesh.num_vertices() {
        return Err(FieldError::Length { expected: mesh.num_vertices(), got: u.len() });
    }
    let s1 = mesh.apply_stiffness(u.u1());
    let s2 = mesh.apply_stiffness(u.u2());
    Ok(quadratic(u, &s1, &s2))
}

fn quadratic(u: &PairField, s1: &[f64], s2: &[f64]) -> f64 {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    (dot(u.u1(), s1) + dot(u.u1(), s2) + dot(u.u2(), s2)) / 3.0
}

/// Everything one descent step needs: energy, its parts and the load-form gradient.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub j: f64,
    pub q: f64,
    pub log_integral: [f64; 2],
    /// `int u_i`, zero on the disk where the average terms are absent.
    pub mean: [f64; 2],
    /// `S u_i`.
    pub stiff: [Vec<f64>; 2],
    /// Normalized vertex masses of `h~_i e^(u_i)`.
    pub masses: [Vec<f64>; 2],
    /// Derivative of `J` as a load vector, `dJ/du_i` per vertex.
    pub load: [Vec<f64>; 2],
}

impl Evaluation {
    /// Riesz representative of the derivative in the lumped mass inner product, in the gauge subspace.
    pub fn gradient(&self, mesh: &SurfaceMesh) -> PairField {
        let areas = mesh.vertex_areas();
        let g: [Vec<f64>; 2] = std::array::from_fn(|i| self.load[i].iter().zip(areas).map(|(l, a)| l / a).collect());
        let [g1, g2] = g;
        let mut out = PairField::new(g1.into(), g2.into(), mesh.natural_gauge());
        out.project(mesh);
        out
    }

    /// Mass norm of the gradient.
    pub fn residual(&self, mesh: &SurfaceMesh) -> f64 {
        let g = self.gradient(mesh);
        let areas = mesh.vertex_areas();
        (0..2).map(|i| g.component(i).iter().zip(areas).map(|(x, a)| a * x * x).sum::<f64>()).sum::<f64>().sqrt()
    }
}

/// Energy, its parts and gradient at `u`.
pub fn evaluate(
    mesh: &SurfaceMesh,
    weights: &EffectiveWeights,
    params: &ProblemParams,
    u: &PairField,
) -> Result<Evaluation> {
    check(mesh, weights, u.len())?;
    check_gauge(mesh, u)?;
    let closed = mesh.natural_gauge() == Gauge::ZeroMean;
    let stiff = [mesh.apply_stiffness(u.u1()), mesh.apply_stiffness(u.u2())];
    let q = quadratic(u, &stiff[0], &stiff[1]);
    if !q.is_finite() {
        return Err(FieldError::NonFinite("quadratic form Q"));
    }
    let mut log_int = [0.0; 2];
    let mut mean = [0.0; 2];
    let mut masses: [Vec<f64>; 2] = Default::default();
    for i in 0..2 {
        let ui = u.component(i);
        log_int[i] = log_integral(weights, ui, i)?;
        masses[i] = weights.omega(i).iter().zip(ui.iter()).map(|(w, x)| w * (x - log_int[i]).exp()).collect();
        if closed {
            mean[i] = mesh.integrate(ui);
        }
    }
    let j = q - (0..2).map(|i| params.rho[i] * (log_int[i] - mean[i])).sum::<f64>();
    if !j.is_finite() {
        return Err(FieldError::NonFinite("energy J"));
    }
    let areas = mesh.vertex_areas();
    let load: [Vec<f64>; 2] = std::array::from_fn(|i| {
        let other = 1 - i;
        (0..mesh.num_vertices())
            .map(|v| {
                let avg = if closed { areas[v] } else { 0.0 };
                (2.0 * stiff[i][v] + stiff[other][v]) / 3.0 - params.rho[i] * (masses[i][v] - avg)
            })
            .collect()
    });
    Ok(Evaluation { j, q, log_integral: log_int, mean, stiff, masses, load })
}

/// `J(u) = int Q(u) - sum_i rho_i (log int h~_i e^(u_i) - int u_i)`; the average
/// terms are dropped on the disk.
pub fn j_energy(mesh: &SurfaceMesh, weights: &EffectiveWeights, params: &ProblemParams, u: &PairField) -> Result<f64> {
    evaluate(mesh, weights, params, u).map(|e| e.j)
}

/// Gradient of `J` in the lumped mass inner product, projected onto the gauge subspace.
pub fn j_gradient(
    mesh: &SurfaceMesh,
    weights: &EffectiveWeights,
    params: &ProblemParams,
    u: &PairField,
) -> Result<PairField> {
    evaluate(mesh, weights, params, u).map(|e| e.gradient(mesh))
}

/// Scalar functional `I(u) = 1/2 int |grad u|^2 - 2 rho (log int h~_i e^u - int u)`.
pub fn i_energy_scalar(
    mesh: &SurfaceMesh,
    weights: &EffectiveWeights,
    component: usize,
    rho: f64,
    u: &[f64],
) -> Result<f64> {
    check(mesh, weights, u.len())?;
    let dirichlet = 0.5 * mesh.stiffness_form(u, u);
    let mean = if mesh.natural_gauge() == Gauge::ZeroMean { mesh.integrate(u) } else { 0.0 };
    let out = dirichlet - 2.0 * rho * (log_integral(weights, u, component)? - mean);
    if out.is_finite() {
        Ok(out)
    } else {
        Err(FieldError::NonFinite("scalar energy I"))
    }
}

/// Normalized density `f = h~ e^u / int h~ e^u`.
#[derive(Clone, Debug)]
pub struct Density {
    /// Per-vertex density (`mass / vertex area`).
    pub values: ScalarField,
    /// Vertex masses, summing to one.
    pub masses: Vec<f64>,
    /// `log int h~ e^u`.
    pub log_total: f64,
}

pub fn density(mesh: &SurfaceMesh, weights: &EffectiveWeights, u: &PairField, i: usize) -> Result<Density> {
    check(mesh, weights, u.len())?;
    let ui = u.component(i);
    let log_total = log_integral(weights, ui, i)?;
    let mut masses: Vec<f64> = weights.omega(i).iter().zip(ui.iter()).map(|(w, x)| w * (x - log_total).exp()).collect();
    let sum: f64 = masses.iter().sum();
    masses.iter_mut().for_each(|m| *m /= sum);
    let values = masses.iter().zip(mesh.vertex_areas()).map(|(m, a)| m / a).collect::<Vec<_>>().into();
    Ok(Density { values, masses, log_total })
}

#[cfg(test)]
mod tests {
    use super::super::{effective_weights, Background, SingularPoint, WeightMode};
    use super::*;
    use crate::mesh::{build_surface_mesh, SurfaceKind};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn sphere_setup() -> (SurfaceMesh, EffectiveWeights, ProblemParams) {
        let p = [0.0, 0.0, 1.0];
        let mesh = build_surface_mesh(SurfaceKind::ClosedSphere, 3, &[p], 1.0).unwrap();
        let s = SingularPoint { id: 0, position: p, alpha: [-0.5, 0.3] };
        let h = Background::Affine { constant: 1.0, linear: [0.5, 0.0, 0.0] };
        let params = ProblemParams::new([PI, 1.5 * PI], vec![s], [h.clone(), h]).unwrap();
        let w = effective_weights(&mesh, &params, WeightMode::ModelProduct).unwrap();
        (mesh, w, params)
    }

    #[test]
    fn zero_field() {
        let (mesh, w, params) = sphere_setup();
        let u = PairField::zeros(&mesh);
        assert!(j_energy(&mesh, &w, &params, &u).unwrap().abs() < 1e-14);
        assert!((singular_integral(&mesh, &w, &vec![0.0; mesh.num_vertices()], 0).unwrap() - 1.0).abs() < 1e-13);
        let c = vec![1.7; mesh.num_vertices()];
        assert!((singular_integral(&mesh, &w, &c, 1).unwrap() - 1.7f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn q_special_cases() {
        let (mesh, _, _) = sphere_setup();
        let phi: Vec<f64> = mesh.vertices().iter().map(|x| x[0] * x[1] + x[2]).collect();
        let dir = mesh.stiffness_form(&phi, &phi);
        let same = PairField::new(phi.clone().into(), phi.clone().into(), Gauge::ZeroMean);
        assert!((q_energy(&mesh, &same).unwrap() - dir).abs() < 1e-12 * dir);
        let half: Vec<f64> = phi.iter().map(|x| -x / 2.0).collect();
        let anti = PairField::new(phi.into(), half.into(), Gauge::ZeroMean);
        assert!((q_energy(&mesh, &anti).unwrap() - dir / 4.0).abs() < 1e-12 * dir);
    }

    #[test]
    fn shift_invariance_and_gradient() {
        let (mesh, w, params) = sphere_setup();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = mesh.num_vertices();
        let mut rand_field = || -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
        let u = PairField::projected(&mesh, rand_field(), rand_field()).unwrap();
        let v = PairField::projected(&mesh, rand_field(), rand_field()).unwrap();
        let j0 = j_energy(&mesh, &w, &params, &u).unwrap();
        let j1 = j_energy(&mesh, &w, &params, &u.shifted([3.0, -2.0])).unwrap();
        assert!((j0 - j1).abs() < 1e-11 * j0.abs().max(1.0));
        let g = j_gradient(&mesh, &w, &params, &u).unwrap();
        assert!(mesh.mean(g.u1()).abs() < 1e-12 && mesh.mean(g.u2()).abs() < 1e-12);
        let eps = 1e-4;
        let fd = (j_energy(&mesh, &w, &params, &u.axpy(eps, &v)).unwrap()
            - j_energy(&mesh, &w, &params, &u.axpy(-eps, &v)).unwrap())
            / (2.0 * eps);
        let an: f64 = (0..2)
            .map(|i| {
                mesh.integrate(
                    &g.component(i).iter().zip(v.component(i).iter()).map(|(a, b)| a * b).collect::<Vec<_>>(),
                )
            })
            .sum();
        assert!((fd - an).abs() < 1e-6 * an.abs(), "fd {fd} analytic {an}");
    }

    #[test]
    fn density_normalized() {
        let (mesh, w, _) = sphere_setup();
        let u = PairField::zeros(&mesh);
        let d = density(&mesh, &w, &u, 0).unwrap();
        assert!((mesh.integrate(&d.values) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overflow_guard() {
        let (mesh, w, _) = sphere_setup();
        let g = vec![800.0; mesh.num_vertices()];
        assert!(matches!(singular_integral(&mesh, &w, &g, 0), Err(FieldError::Overflow(_))));
        assert!((log_integral(&w, &g, 0).unwrap() - 800.0).abs() < 1e-10);
    }
}
