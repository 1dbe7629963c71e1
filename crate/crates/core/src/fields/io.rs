use std::io::{BufRead, Write};

use super::{FieldError, PairField, Result};
use crate::mesh::Gauge;

/// Field CSV: `vertex_id,u1,u2`.
pub fn write_field_csv(u: &PairField, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "vertex_id,u1,u2")?;
    for (v, (a, b)) in u.u1().iter().zip(u.u2().iter()).enumerate() {
        writeln!(out, "{v},{a:.16e},{b:.16e}")?;
    }
    Ok(())
}

/// Reads a field written by [`write_field_csv`].
pub fn read_field_csv(input: impl BufRead, gauge: Gauge) -> Result<PairField> {
    let mut u1 = Vec::new();
    let mut u2 = Vec::new();
    for (line_no, line) in input.lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let parse = |k: usize| -> Result<f64> {
            cols.get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| FieldError::Parse(format!("line {}: bad column {k}", line_no + 1)))
        };
        let id = parse(0)? as usize;
        if id != u1.len() {
            return Err(FieldError::Parse(format!("line {}: vertex ids must be consecutive", line_no + 1)));
        }
        u1.push(parse(1)?);
        u2.push(parse(2)?);
    }
    Ok(PairField::new(u1.into(), u2.into(), gauge))
}
