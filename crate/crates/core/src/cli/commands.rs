use std::fs::File;
use std::io::BufReader;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{lambda_sweep, FieldSource, InitChoice, RunConfig, WeightChoice};
use super::{numerical, CliError, Output};
use crate::bubbles::{asymptotic_report, phi_map, write_points_csv, write_report_csv, write_report_svg, BubbleSpec};
use crate::diagnostics::{
    bubble_members, join_projection, mt_deficit_probe, pohozaev_disk, stereographic_pohozaev, write_deficit_csv,
    ConcentrationConfig, PohozaevReport,
};
use crate::fields::{
    effective_weights, read_field_csv, write_field_csv, EffectiveWeights, PairField, ProblemParams, WeightMode,
};
use crate::mesh::{SurfaceKind, SurfaceMesh};
use crate::regions::{
    classify as classify_rho, count_m, join_betti, scan_regions, write_region_csv, write_region_svg, ScanGrid,
};
use crate::solver::{minimize, write_trace_csv, Init, SolveOptions, SolveResult};

type Result<T> = std::result::Result<T, CliError>;

fn require_rho(config: &RunConfig) -> Result<[f64; 2]> {
    config.rho().ok_or_else(|| CliError::invalid("rho", "this command needs rho"))
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref().ok_or_else(|| CliError::invalid(name, format!("this command needs a [{name}] section")))
}

struct Problem {
    mesh: SurfaceMesh,
    params: ProblemParams,
    weights: EffectiveWeights,
}

fn problem(config: &RunConfig, rho: [f64; 2], default_mode: WeightMode) -> Result<Problem> {
    let params = config.params(rho).map_err(numerical)?;
    let mesh = config.mesh().map_err(numerical)?;
    let mode = match config.surface.weights {
        Some(WeightChoice::Model) => WeightMode::ModelProduct,
        Some(WeightChoice::Green) => WeightMode::GreenExact,
        None => default_mode,
    };
    let weights = effective_weights(&mesh, &params, mode).map_err(numerical)?;
    Ok(Problem { mesh, params, weights })
}

fn run_solver(config: &RunConfig, p: &Problem, seed: u64) -> Result<SolveResult> {
    let s = &config.solve;
    let init = match s.init {
        InitChoice::Zero => Init::Zero,
        InitChoice::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = p.mesh.num_vertices();
            let mut noise = || (0..n).map(|_| s.init_amplitude * rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
            let (u1, u2) = (noise(), noise());
            Init::Field(PairField::projected(&p.mesh, u1, u2).map_err(numerical)?)
        }
    };
    let opts = SolveOptions {
        max_iters: s.max_iters,
        grad_tol: s.grad_tol,
        armijo_c: s.armijo_c,
        backtrack: s.backtrack,
        init,
    };
    minimize(&p.mesh, &p.weights, &p.params, &opts).map_err(numerical)
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    surface: SurfaceKind,
    vertices: usize,
    triangles: usize,
    rho: [f64; 2],
    converged: bool,
    status: &'a str,
    iterations: usize,
    j_value: f64,
    residual: f64,
    strictly_decreasing: bool,
}

impl<'a> SolveSummary<'a> {
    fn new(p: &Problem, r: &'a SolveResult) -> Self {
        Self {
            surface: p.mesh.kind(),
            vertices: p.mesh.num_vertices(),
            triangles: p.mesh.triangles().len(),
            rho: p.params.rho,
            converged: r.converged,
            status: &r.status,
            iterations: r.iterations,
            j_value: r.j_value,
            residual: r.residual,
            strictly_decreasing: r.strictly_decreasing(),
        }
    }
}

fn not_converged(r: &SolveResult) -> CliError {
    CliError::Numerical(format!("solver did not converge after {} iterations: {}", r.iterations, r.status))
}

pub(super) fn solve(config: &RunConfig, seed: u64, out: &mut Output) -> Result<String> {
    let p = problem(config, require_rho(config)?, WeightMode::ModelProduct)?;
    let r = run_solver(config, &p, seed)?;
    out.json("solve.json", &SolveSummary::new(&p, &r))?;
    out.csv("field.csv", |w| write_field_csv(&r.u, w))?;
    out.csv("trace.csv", |w| write_trace_csv(&r.trace, w))?;
    if !r.converged {
        return Err(not_converged(&r));
    }
    Ok(format!("converged in {} iterations, J = {:.12e}, residual = {:.3e}", r.iterations, r.j_value, r.residual))
}

pub(super) fn classify(config: &RunConfig, out: &mut Output) -> Result<String> {
    let report = classify_rho(&config.configuration(), require_rho(config)?).map_err(numerical)?;
    out.json("classify.json", &report)?;
    let [m1, m2, m3] = report.m;
    Ok(format!("M = ({m1}, {m2}, {m3}), coercive = {}", report.coercive))
}

pub(super) fn scan(config: &RunConfig, out: &mut Output) -> Result<String> {
    let s = section(&config.scan, "scan")?;
    let grid = ScanGrid { rho1: config.scaled(s.rho1), rho2: config.scaled(s.rho2), steps: s.steps };
    let map = scan_regions(&config.configuration(), grid).map_err(numerical)?;
    out.csv("regions.csv", |w| write_region_csv(&map, w))?;
    out.bytes("regions.svg", write_region_svg(&map).as_bytes())?;
    Ok(format!("{} cells", s.steps[0] * s.steps[1]))
}

pub(super) fn bubble(config: &RunConfig, out: &mut Output) -> Result<String> {
    let b = section(&config.bubble, "bubble")?;
    let p = problem(config, require_rho(config)?, WeightMode::ModelProduct)?;
    let lambdas = lambda_sweep(b.log2_lambda);
    let reports = b
        .families
        .iter()
        .map(|f| asymptotic_report(&p.mesh, &p.weights, &p.params, &f.family(), &lambdas).map_err(numerical))
        .collect::<Result<Vec<_>>>()?;
    out.csv("bubble_slopes.csv", |w| write_report_csv(&reports, w))?;
    out.csv("bubble_points.csv", |w| write_points_csv(&reports, w))?;
    out.bytes("bubble.svg", write_report_svg(&reports).as_bytes())?;
    let worst = reports
        .iter()
        .flat_map(|r| &r.rows)
        .filter(|r| !r.quantity.ends_with(":alt"))
        .map(|r| r.rel_err)
        .fold(0.0, f64::max);
    Ok(format!("{} families, worst relative slope error {worst:.3e}", reports.len()))
}

#[derive(Serialize)]
struct PohozaevOutput<'a> {
    solve: SolveSummary<'a>,
    identity: Option<PohozaevReport>,
}

pub(super) fn pohozaev(config: &RunConfig, seed: u64, out: &mut Output) -> Result<String> {
    let default_mode = match config.kind() {
        SurfaceKind::ClosedSphere => WeightMode::GreenExact,
        SurfaceKind::UnitDisk => WeightMode::ModelProduct,
    };
    let p = problem(config, require_rho(config)?, default_mode)?;
    let r = run_solver(config, &p, seed)?;
    if !r.converged {
        out.json("pohozaev.json", &PohozaevOutput { solve: SolveSummary::new(&p, &r), identity: None })?;
        return Err(not_converged(&r));
    }
    let report = match p.mesh.kind() {
        SurfaceKind::UnitDisk => pohozaev_disk(&p.mesh, &p.weights, &p.params, &r.u),
        SurfaceKind::ClosedSphere => stereographic_pohozaev(&p.mesh, &p.weights, &p.params, &r.u),
    }
    .map_err(numerical)?;
    let message =
        format!("lhs = {:.12e}, rhs = {:.12e}, relative gap = {:.3e}", report.lhs, report.rhs, report.relative_gap);
    out.json("pohozaev.json", &PohozaevOutput { solve: SolveSummary::new(&p, &r), identity: Some(report) })?;
    Ok(message)
}

#[derive(Serialize)]
struct BettiOutput {
    m: [usize; 3],
    reduced_b0: usize,
    b1: usize,
    formula_holds: bool,
}

pub(super) fn betti(config: &RunConfig, out: &mut Output) -> Result<String> {
    let m = match config.betti.as_ref().and_then(|b| b.m) {
        Some(m) => m,
        None => count_m(require_rho(config)?, &config.alphas()).m,
    };
    let b = join_betti(m).map_err(numerical)?;
    out.json("betti.json", &BettiOutput { m, reduced_b0: b.reduced_b0, b1: b.b1, formula_holds: b.formula_holds })?;
    Ok(format!(
        "M = ({}, {}, {}): (b0~, b1) = ({}, {})\nformula check: {}",
        m[0],
        m[1],
        m[2],
        b.reduced_b0,
        b.b1,
        if b.formula_holds { "PASS" } else { "FAIL" }
    ))
}

pub(super) fn probe(config: &RunConfig, out: &mut Output) -> Result<String> {
    let pr = section(&config.probe, "probe")?;
    // Bubble profiles are shaped by rho; the largest probed rho sets the regimes.
    let grid: Vec<[f64; 2]> = pr.rho_grid.iter().map(|&r| config.scaled(r)).collect();
    let shape = config.rho().unwrap_or_else(|| grid.iter().fold([0.0, 0.0], |a, r| [a[0].max(r[0]), a[1].max(r[1])]));
    let p = problem(config, shape, WeightMode::ModelProduct)?;
    let lambdas = lambda_sweep(pr.log2_lambda);
    let mut members = Vec::new();
    for f in &pr.families {
        members.extend(bubble_members(&p.mesh, &p.weights, &p.params, &f.family(), &lambdas).map_err(numerical)?);
    }
    let report = mt_deficit_probe(&members, &grid).map_err(numerical)?;
    out.csv("deficit.csv", |w| write_deficit_csv(&report, w))?;
    out.json("probe.json", &report.verdicts)?;
    let unbounded =
        report.verdicts.iter().filter(|v| v.verdict == crate::diagnostics::Boundedness::UnboundedEmpirically).count();
    Ok(format!("{} of {} rho values unbounded empirically", unbounded, report.verdicts.len()))
}

pub(super) fn concentration(config: &RunConfig, seed: u64, out: &mut Output) -> Result<String> {
    let c = section(&config.concentration, "concentration")?;
    let p = problem(config, require_rho(config)?, WeightMode::ModelProduct)?;
    let mut cfg = ConcentrationConfig::with_delta(c.delta);
    cfg.tau = c.tau.unwrap_or(cfg.tau);
    cfg.delta_prime = c.delta_prime.unwrap_or(cfg.delta_prime);
    let u = match c.source {
        FieldSource::Solve => {
            let r = run_solver(config, &p, seed)?;
            if !r.converged {
                return Err(not_converged(&r));
            }
            r.u
        }
        FieldSource::Bubble => {
            let b = c.bubble.as_ref().expect("validated");
            let spec = BubbleSpec { x1: b.x1, x2: b.x2, t: b.t, lambda: b.lambda };
            phi_map(&p.mesh, &spec, &p.params).map_err(numerical)?
        }
        FieldSource::File => {
            let path = c.field.as_ref().expect("validated");
            let file = File::open(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            let u = read_field_csv(BufReader::new(file), p.mesh.natural_gauge()).map_err(numerical)?;
            if u.len() != p.mesh.num_vertices() {
                return Err(CliError::Numerical(format!(
                    "{} has {} vertices, the mesh has {}",
                    path.display(),
                    u.len(),
                    p.mesh.num_vertices()
                )));
            }
            u
        }
    };
    let j = join_projection(&p.mesh, &p.weights, &p.params, &u, &cfg).map_err(numerical)?;
    out.json("concentration.json", &j)?;
    Ok(format!("beta = {:?}, sigma = {:?}, t' = {}", j.beta, j.sigma, j.t_prime))
}
