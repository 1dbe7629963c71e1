//! Numerics for the singular SU(3) Toda system on the sphere and the unit disk.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bubbles;
pub mod cli;
pub mod diagnostics;
pub mod fields;
pub mod mesh;
pub mod regions;
pub mod solver;
pub mod svg;
