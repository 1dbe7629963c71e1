//! Descent solver for critical points of `J` in the coercive range,
//! Euler-Lagrange residuals, and continuation along `rho` paths.

mod continuation;
mod minimize;

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::fields::{FieldError, PairField};
use crate::mesh::MeshError;

pub use continuation::{continuation_path, max_norm_growth, PathPoint};
pub use minimize::{el_residual, minimize};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid options: {0}")]
    Options(String),
    #[error("non-finite energy at iteration {iteration}")]
    NonFinite { iteration: usize, iterate: Box<PairField> },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

pub type Result<T, E = SolverError> = std::result::Result<T, E>;

#[derive(Clone, Debug, Default)]
pub enum Init {
    #[default]
    Zero,
    Field(PairField),
    /// Start from the previous solution along a continuation path (zero for a standalone solve).
    WarmStart,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Stop once the mass norm of the gradient is below this.
    pub grad_tol: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo_c: f64,
    /// Step reduction factor when the Armijo test fails.
    pub backtrack: f64,
    pub init: Init,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iters: 20_000, grad_tol: 1e-8, armijo_c: 1e-4, backtrack: 0.5, init: Init::Zero }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(SolverError::Options(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(SolverError::Options(format!("armijo c must lie in (0, 1), got {}", self.armijo_c)));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(SolverError::Options(format!("backtrack factor must lie in (0, 1), got {}", self.backtrack)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub j: f64,
    pub grad_norm: f64,
    /// Accepted step length (0 on the first row).
    pub step: f64,
    /// `J(new) - J(old)` evaluated without cancellation (0 on the first row).
    pub delta_j: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub u: PairField,
    pub j_value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
    /// Why the solve stopped.
    pub status: String,
}

impl SolveResult {
    /// Every accepted step decreased `J`.
    pub fn strictly_decreasing(&self) -> bool {
        self.trace.iter().skip(1).all(|r| r.delta_j < 0.0)
    }
}

/// Trace CSV: `iter,J,grad_norm,step,delta_J`.
pub fn write_trace_csv(trace: &[TraceRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "iter,J,grad_norm,step,delta_J")?;
    for r in trace {
        writeln!(out, "{},{:.16e},{:.16e},{:.16e},{:.16e}", r.iter, r.j, r.grad_norm, r.step, r.delta_j)?;
    }
    Ok(())
}
