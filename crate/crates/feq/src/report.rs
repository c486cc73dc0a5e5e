//! Reports: a deterministic `payload` plus a `meta` block for run-dependent
//! data (timings, versions). Only the payload is meant for golden comparison.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Duration;

use feq_core::{AkCertificate, DecayFit, LambdaReport, Solution};
use serde::Serialize;

use crate::config::TermConfig;

pub const REPORT_FILE: &str = "report.json";
pub const SOLUTION_FILE: &str = "solution.csv";
pub const COEFFS_FILE: &str = "coeffs.csv";

#[derive(Debug, Serialize)]
pub struct Report<P> {
    pub payload: P,
    pub meta: Meta,
}

#[derive(Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub elapsed_seconds: f64,
}

impl Meta {
    pub fn new(elapsed: Duration) -> Self {
        Meta { tool: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION"), elapsed_seconds: elapsed.as_secs_f64() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    Pass,
    CertificationFailed,
    NonConvergence,
    Ok,
}

/// Normalized description of the equation that was run.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemSummary {
    pub k: f64,
    pub rhs: String,
    pub family: Option<String>,
    pub terms: Vec<TermConfig>,
    pub tail_bound: f64,
    pub tail_bound_strip: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Failure {
    InvalidMap { term: usize, x: f64, value: f64, message: String },
    DenominatorVanishes { term: usize, min_modulus: f64, message: String },
    ContractionViolation { rho: f64, message: String },
    NestingViolation { a: f64, violation_count: usize, message: String },
    NonConvergence { iterations: usize, increment: f64, message: String },
    ResolutionExceeded { degree: usize, message: String },
    Evaluation { message: String },
}

impl From<&feq_core::Error> for Failure {
    fn from(e: &feq_core::Error) -> Self {
        use feq_core::Error as E;
        let message = e.to_string();
        match *e {
            E::InvalidMap { term, x, value } => Failure::InvalidMap { term, x, value, message },
            E::DenominatorVanishes { term, min_modulus } => Failure::DenominatorVanishes { term, min_modulus, message },
            E::ContractionViolation { rho } => Failure::ContractionViolation { rho, message },
            E::NonConvergence { iterations, increment } => Failure::NonConvergence { iterations, increment, message },
            E::ResolutionExceeded { degree, .. } => Failure::ResolutionExceeded { degree, message },
            _ => Failure::Evaluation { message },
        }
    }
}

/// Reasons an 𝔄(k) certificate did not pass.
pub fn certificate_failures(cert: &AkCertificate) -> Vec<Failure> {
    let mut out = Vec::new();
    if !(cert.rho_strip < 1.0) {
        out.push(Failure::ContractionViolation {
            rho: cert.rho_strip,
            message: format!("operator is not a contraction on the strip: rho = {}", cert.rho_strip),
        });
    }
    for ek in cert.ek.iter().filter(|e| !e.pass) {
        out.push(Failure::NestingViolation {
            a: ek.a,
            violation_count: ek.violation_count,
            message: format!("inner maps do not nest the stadiums for A = {} (max ratio {})", ek.a, ek.max_ratio),
        });
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct PointValue {
    pub x: f64,
    pub value: f64,
}

/// Scalars of a [`Solution`]; coefficients live in a separate file.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionSummary {
    pub iterations: usize,
    pub residual: f64,
    pub residual_grid: usize,
    pub apriori_bound: f64,
    pub aposteriori_bound: f64,
    pub rho_used: f64,
    pub truncation_budget: f64,
    pub degree: usize,
    pub coefficients: &'static str,
    pub samples: &'static str,
    pub values: Vec<PointValue>,
    pub decay: Option<DecayFit>,
}

impl SolutionSummary {
    pub fn new(s: &Solution) -> Self {
        let values = [-1.0, -0.5, 0.0, 0.5, 1.0]
            .into_iter()
            .map(|x| PointValue { x, value: s.phi.eval(x).unwrap_or(f64::NAN) })
            .collect();
        SolutionSummary {
            iterations: s.iterations,
            residual: s.residual,
            residual_grid: feq_core::solver::RESIDUAL_GRID,
            apriori_bound: s.apriori_bound,
            aposteriori_bound: s.aposteriori_bound,
            rho_used: s.rho_used,
            truncation_budget: s.truncation_budget,
            degree: s.phi.degree(),
            coefficients: COEFFS_FILE,
            samples: SOLUTION_FILE,
            values,
            decay: s.decay.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SolvePayload {
    pub command: &'static str,
    pub status: Status,
    pub problem: ProblemSummary,
    pub certificate: Option<AkCertificate>,
    pub solution: Option<SolutionSummary>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Serialize)]
pub struct LambdaPayload {
    pub command: &'static str,
    pub expression: String,
    pub report: LambdaReport,
}

#[derive(Debug, Serialize)]
pub struct DiagnosePayload {
    pub command: &'static str,
    pub source: String,
    pub coefficients: usize,
    pub fit: DecayFit,
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested").join("r.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn failures_are_tagged() {
        let f = Failure::from(&feq_core::Error::InvalidMap { term: 0, x: 1.0, value: 2.0 });
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["kind"], "invalid_map");
        assert_eq!(v["value"], 2.0);
    }
}
