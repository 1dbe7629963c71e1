//! Config-driven front end: one TOML file, one command, artifacts in an output directory.

mod commands;
mod config;

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

pub use config::{
    lambda_sweep, parse_config, BackgroundConfig, BettiConfig, BubbleConfig, BubblePointConfig, ConcentrationSection,
    Diagnostic, FamilyConfig, FieldSource, HConfig, InitChoice, ProbeConfig, RefineConfig, RunConfig, ScanConfig,
    SingularConfig, SolveConfig, SurfaceChoice, SurfaceConfig, Units, WeightChoice,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Solve,
    Classify,
    Scan,
    Bubble,
    Pohozaev,
    Betti,
    Probe,
    Concentration,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", list(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("{0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn list(d: &[Diagnostic]) -> String {
    d.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) | CliError::Io { .. } => 3,
        }
    }

    pub(crate) fn invalid(path: &str, message: impl Into<String>) -> Self {
        CliError::Invalid(vec![Diagnostic::new(path, message)])
    }
}

pub(crate) fn numerical(e: impl Display) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub output_dir: PathBuf,
    /// Overrides the config's `seed`.
    pub seed: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { output_dir: PathBuf::from("."), seed: None }
    }
}

/// What a command produced.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Short human-readable result for stdout.
    pub message: String,
}

/// Full validation of a config file without running anything.
pub fn validate(path: &Path) -> Vec<Diagnostic> {
    match load(path) {
        Ok(c) => c.diagnostics(),
        Err(CliError::Invalid(d)) => d,
        Err(e) => vec![Diagnostic::new("", e.to_string())],
    }
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::invalid("", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|d| CliError::Invalid(vec![d]))
}

/// Loads, validates and runs `command` on the config at `path`.
pub fn run_file(command: Command, path: &Path, opts: &RunOptions) -> Result<RunSummary, CliError> {
    run(command, &load(path)?, opts)
}

pub fn run(command: Command, config: &RunConfig, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let diagnostics = config.diagnostics();
    if !diagnostics.is_empty() {
        return Err(CliError::Invalid(diagnostics));
    }
    let mut out = Output::new(&opts.output_dir)?;
    let seed = opts.seed.or(config.seed).unwrap_or(0);
    let message = match command {
        Command::Solve => commands::solve(config, seed, &mut out)?,
        Command::Classify => commands::classify(config, &mut out)?,
        Command::Scan => commands::scan(config, &mut out)?,
        Command::Bubble => commands::bubble(config, &mut out)?,
        Command::Pohozaev => commands::pohozaev(config, seed, &mut out)?,
        Command::Betti => commands::betti(config, &mut out)?,
        Command::Probe => commands::probe(config, &mut out)?,
        Command::Concentration => commands::concentration(config, seed, &mut out)?,
    };
    Ok(RunSummary { files: out.files, message })
}

/// Rounds to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if let Some(r) = serde_json::Number::from_f64(round_sig12(x)) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float at 12 significant digits.
pub fn to_json(value: &impl Serialize) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub(crate) struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub(crate) fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, data).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.files.push(path);
        Ok(())
    }

    pub(crate) fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let s = to_json(value).map_err(numerical)?;
        self.bytes(name, s.as_bytes())
    }

    /// Runs a CSV writer into memory, then writes the file.
    pub(crate) fn csv(
        &mut self,
        name: &str,
        write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write(&mut buf).map_err(|source| CliError::Io { path: self.dir.join(name), source })?;
        self.bytes(name, &buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig12(2.0 / 3.0), 0.666666666667);
        assert_eq!(round_sig12(12345.678901234567), 12345.6789012);
        assert_eq!(round_sig12(-1.0e-300 / 3.0), -3.33333333333e-301);
        assert_eq!(round_sig12(0.0), 0.0);
        let s = to_json(&serde_json::json!({"a": [1.0 / 3.0, 2], "b": 7u8})).unwrap();
        assert!(s.contains("0.333333333333") && !s.contains("0.3333333333333"), "{s}");
        assert!(s.contains("\"b\": 7"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::invalid("rho", "bad").exit_code(), 2);
        assert_eq!(numerical("nan").exit_code(), 3);
    }
}
