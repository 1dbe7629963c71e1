use super::{Init, Result, SolveOptions, SolveResult, SolverError, TraceRow};
use crate::fields::{evaluate, EffectiveWeights, Evaluation, PairField, ProblemParams};
use crate::mesh::{Gauge, SurfaceMesh};

/// Mass norm of the gradient of `J` at `u`.
pub fn el_residual(
    mesh: &SurfaceMesh,
    weights: &EffectiveWeights,
    params: &ProblemParams,
    u: &PairField,
) -> Result<f64> {
    Ok(evaluate(mesh, weights, params, u)?.residual(mesh))
}

/// Descent direction `-(B^-1 (x) S^-1) dJ` with `B^-1 = [[2, -1], [-1, 2]]`,
/// i.e. the exact minimizer of the quadratic part along the current gradient.
fn direction(mesh: &SurfaceMesh, eval: &Evaluation) -> Result<PairField> {
    let gauge = mesh.natural_gauge();
    let [l1, l2] = &eval.load;
    let rhs1: Vec<f64> = l1.iter().zip(l2).map(|(a, b)| -(2.0 * a - b)).collect();
    let rhs2: Vec<f64> = l1.iter().zip(l2).map(|(a, b)| -(2.0 * b - a)).collect();
    let d1 = mesh.solve_load(&compatible(rhs1, gauge), gauge)?;
    let d2 = mesh.solve_load(&compatible(rhs2, gauge), gauge)?;
    let mut d = PairField::new(d1.into(), d2.into(), gauge);
    d.project(mesh);
    Ok(d)
}

/// Removes the round-off total of a closed-surface load.
fn compatible(mut load: Vec<f64>, gauge: Gauge) -> Vec<f64> {
    if gauge == Gauge::ZeroMean {
        let s = load.iter().sum::<f64>() / load.len() as f64;
        load.iter_mut().for_each(|x| *x -= s);
    }
    load
}

/// `J(u + t d) - J(u)` without cancellation: the quadratic part exactly, the
/// log-integrals via `log1p(sum p expm1(t d))`.
struct LineModel {
    /// `<dQ(u), d>` and `Q(d)`.
    linear_q: f64,
    quad_q: f64,
    rho: [f64; 2],
    masses: [Vec<f64>; 2],
    d: [Vec<f64>; 2],
    mean_d: [f64; 2],
}

impl LineModel {
    fn new(mesh: &SurfaceMesh, params: &ProblemParams, eval: &Evaluation, d: &PairField) -> Self {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let [s1, s2] = &eval.stiff;
        let linear_q = (dot(d.u1(), s1) * 2.0 + dot(d.u1(), s2) + dot(d.u2(), s1) + 2.0 * dot(d.u2(), s2)) / 3.0;
        let sd1 = mesh.apply_stiffness(d.u1());
        let sd2 = mesh.apply_stiffness(d.u2());
        let quad_q = (dot(d.u1(), &sd1) + dot(d.u1(), &sd2) + dot(d.u2(), &sd2)) / 3.0;
        let closed = mesh.natural_gauge() == Gauge::ZeroMean;
        let mean_d = std::array::from_fn(|i| if closed { mesh.integrate(d.component(i)) } else { 0.0 });
        Self {
            linear_q,
            quad_q,
            rho: params.rho,
            masses: eval.masses.clone(),
            d: [d.u1().to_vec(), d.u2().to_vec()],
            mean_d,
        }
    }

    fn delta(&self, t: f64) -> f64 {
        let mut out = t * self.linear_q + t * t * self.quad_q;
        for i in 0..2 {
            let s: f64 = self.masses[i].iter().zip(&self.d[i]).map(|(p, d)| p * (t * d).exp_m1()).sum();
            out -= self.rho[i] * (s.ln_1p() - t * self.mean_d[i]);
        }
        out
    }
}

/// Preconditioned gradient descent with Armijo backtracking on the gauge subspace.
pub fn minimize(
    mesh: &SurfaceMesh,
    weights: &EffectiveWeights,
    params: &ProblemParams,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    opts.validate()?;
    let mut u = match &opts.init {
        Init::Field(f) => {
            let mut f = f.clone();
            f.project(mesh);
            f
        }
        Init::Zero | Init::WarmStart => PairField::zeros(mesh),
    };
    let mut eval = evaluate(mesh, weights, params, &u)?;
    let mut residual = eval.residual(mesh);
    let mut trace = vec![TraceRow { iter: 0, j: eval.j, grad_norm: residual, step: 0.0, delta_j: 0.0 }];
    let mut step_guess = 1.0f64;
    let mut iterations = 0;
    let mut status = String::from("converged");
    let converged = loop {
        if residual < opts.grad_tol {
            break true;
        }
        if iterations >= opts.max_iters {
            status = format!("iteration limit {} reached", opts.max_iters);
            break false;
        }
        let d = direction(mesh, &eval)?;
        let model = LineModel::new(mesh, params, &eval, &d);
        let slope: f64 =
            (0..2).map(|i| eval.load[i].iter().zip(d.component(i).iter()).map(|(a, b)| a * b).sum::<f64>()).sum();
        if !(slope < 0.0) {
            status = format!("direction is not a descent direction (slope {slope:.3e})");
            break false;
        }
        let mut t = step_guess.min(1.0);
        let accepted = loop {
            let dj = model.delta(t);
            if dj.is_finite() && dj <= opts.armijo_c * t * slope && dj < 0.0 {
                break Some(dj);
            }
            t *= opts.backtrack;
            if t < 1e-20 {
                break None;
            }
        };
        let Some(delta_j) = accepted else {
            status = "line search step underflow".into();
            break false;
        };
        let mut next = u.axpy(t, &d);
        next.project(mesh);
        let next_eval = match evaluate(mesh, weights, params, &next) {
            Ok(e) => e,
            Err(_) => return Err(SolverError::NonFinite { iteration: iterations + 1, iterate: Box::new(next) }),
        };
        iterations += 1;
        u = next;
        eval = next_eval;
        residual = eval.residual(mesh);
        trace.push(TraceRow { iter: iterations, j: eval.j, grad_norm: residual, step: t, delta_j });
        step_guess = (2.0 * t).min(1.0);
    };
    if !u.is_finite() {
        return Err(SolverError::NonFinite { iteration: iterations, iterate: Box::new(u) });
    }
    Ok(SolveResult { j_value: eval.j, residual, iterations, converged, trace, status, u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{effective_weights, Background, WeightMode};
    use crate::mesh::{build_surface_mesh, SurfaceKind};
    use std::f64::consts::PI;

    #[test]
    fn trivial_solution_converges_immediately() {
        let mesh = build_surface_mesh(SurfaceKind::ClosedSphere, 3, &[], 1.0).unwrap();
        let params = ProblemParams::uniform([2.0 * PI, 2.0 * PI], vec![]).unwrap();
        let w = effective_weights(&mesh, &params, WeightMode::ModelProduct).unwrap();
        let r = minimize(&mesh, &w, &params, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert!(r.u.max_abs() == 0.0);
    }

    #[test]
    fn nonconstant_background_sphere() {
        let mesh = build_surface_mesh(SurfaceKind::ClosedSphere, 3, &[], 1.0).unwrap();
        let h = Background::Affine { constant: 1.0, linear: [0.5, 0.0, 0.0] };
        let params = ProblemParams::new([2.0 * PI, 2.0 * PI], vec![], [h.clone(), h]).unwrap();
        let w = effective_weights(&mesh, &params, WeightMode::ModelProduct).unwrap();
        let r = minimize(&mesh, &w, &params, &SolveOptions::default()).unwrap();
        assert!(r.converged, "{}", r.status);
        assert!(r.residual < 1e-8);
        assert!(r.j_value < 0.0);
        assert!(r.strictly_decreasing());
        assert!(r.u.gauge_violation(&mesh) < 1e-10);
    }

    #[test]
    fn disk_singular_solve() {
        let origin = [0.0; 3];
        let mesh = build_surface_mesh(SurfaceKind::UnitDisk, 16, &[origin], 2.0).unwrap();
        let s = crate::fields::SingularPoint { id: 0, position: origin, alpha: [-0.5, -0.5] };
        let params = ProblemParams::uniform([PI, PI], vec![s]).unwrap();
        let w = effective_weights(&mesh, &params, WeightMode::ModelProduct).unwrap();
        let r = minimize(&mesh, &w, &params, &SolveOptions::default()).unwrap();
        assert!(r.converged, "{}", r.status);
        assert!(mesh.boundary().iter().all(|&b| r.u.u1()[b] == 0.0));
    }
}
