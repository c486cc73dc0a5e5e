//! Subcommand drivers. Each returns an exit code and the text for stdout;
//! files go to the output directory.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use feq_core::strip::DEFAULT_LAMBDA_ORDER;
use feq_core::{estimate_lambda, fit_coeff_decay, parse_expr, solve_neumann, AkCertificate, ChebRep};

use crate::config::{example_config, BuildError, ConfigError, Expanded, LoadedConfig, Problem, RunConfig};
use crate::report::{
    certificate_failures, to_json, write_atomic, DiagnosePayload, Failure, LambdaPayload, Meta, ProblemSummary,
    Report, SolutionSummary, SolvePayload, Status, COEFFS_FILE, REPORT_FILE, SOLUTION_FILE,
};
use crate::tables::{self, TableError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_CERTIFICATION: u8 = 2;
pub const EXIT_NON_CONVERGENCE: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
}

/// Options shared by `solve` and `certify`.
#[derive(Debug, Clone, Default)]
pub struct RunArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub boundary_samples: Option<usize>,
}

fn load(args: &RunArgs) -> Result<LoadedConfig, CliError> {
    let mut loaded = LoadedConfig::read(&args.config)?;
    let c = &mut loaded.config;
    if let Some(tol) = args.tol {
        if !(tol > 0.0) {
            return Err(CliError::Input(format!("--tol must be positive, got {tol}")));
        }
        c.tol = tol;
    }
    if let Some(m) = args.max_iter {
        if m == 0 {
            return Err(CliError::Input("--max-iter must be at least 1".into()));
        }
        c.max_iter = m;
    }
    if let Some(m) = args.boundary_samples {
        if m < 64 {
            return Err(CliError::Input(format!("--boundary-samples must be at least 64, got {m}")));
        }
        c.boundary_samples = m;
    }
    Ok(loaded)
}

fn summary(c: &RunConfig, e: &Expanded) -> ProblemSummary {
    ProblemSummary {
        k: c.k,
        rhs: c.rhs.clone(),
        family: e.family.clone(),
        terms: e.terms.clone(),
        tail_bound: e.tail_bound,
        tail_bound_strip: e.tail_bound_strip,
    }
}

/// Built problem plus its certificate, or the payload of an early failure.
#[allow(clippy::large_enum_variant)] // built once per process
enum Certified {
    Ready(Problem, AkCertificate),
    Failed(SolvePayload),
}

fn certify_problem(command: &'static str, loaded: &LoadedConfig) -> Result<Certified, CliError> {
    let c = &loaded.config;
    let expanded = loaded.expand()?;
    let failed = |certificate, failures| SolvePayload {
        command,
        status: Status::CertificationFailed,
        problem: summary(c, &expanded),
        certificate,
        solution: None,
        failures,
    };
    let problem = match loaded.build(&expanded) {
        Ok(p) => p,
        Err(BuildError::Config(e)) => return Err(e.into()),
        Err(BuildError::Operator(e)) => return Ok(Certified::Failed(failed(None, vec![Failure::from(&e)]))),
    };
    let [lo, hi] = c.n_range;
    let cert = match problem.op.certify_ak(&c.a_grid, lo, hi, c.boundary_samples) {
        Ok(cert) => cert,
        Err(e) => return Ok(Certified::Failed(failed(None, vec![Failure::from(&e)]))),
    };
    if !cert.pass {
        let failures = certificate_failures(&cert);
        return Ok(Certified::Failed(failed(Some(cert), failures)));
    }
    Ok(Certified::Ready(problem, cert))
}

fn write_report<P: serde::Serialize>(out: &Path, payload: P, start: Instant) -> Result<PathBuf, CliError> {
    let report = Report { payload, meta: Meta::new(start.elapsed()) };
    let path = out.join(REPORT_FILE);
    write_atomic(&path, to_json(&report).as_bytes()).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Drops tables left over from an earlier run so a failed run leaves none.
fn remove_tables(out: &Path) -> Result<(), CliError> {
    for name in [SOLUTION_FILE, COEFFS_FILE] {
        let p = out.join(name);
        match fs::remove_file(&p) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => return Err(CliError::io(&p, e)),
            _ => {}
        }
    }
    Ok(())
}

fn failure_outcome(code: u8, payload: &SolvePayload, report: &Path) -> Outcome {
    let reasons: Vec<String> = payload.failures.iter().map(failure_message).collect();
    Outcome { code, stdout: format!("{:?}: {} (report: {})\n", payload.status, reasons.join("; "), report.display()) }
}

fn failure_message(f: &Failure) -> String {
    match f {
        Failure::InvalidMap { message, .. }
        | Failure::DenominatorVanishes { message, .. }
        | Failure::ContractionViolation { message, .. }
        | Failure::NestingViolation { message, .. }
        | Failure::NonConvergence { message, .. }
        | Failure::ResolutionExceeded { message, .. }
        | Failure::Evaluation { message } => message.clone(),
    }
}

/// Certifies the hypotheses, then solves. Exit 0 on convergence, 2 when a
/// hypothesis fails, 3 when the iteration does not converge.
pub fn solve(args: &RunArgs) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let loaded = load(args)?;
    remove_tables(&args.out)?;
    let (problem, cert) = match certify_problem("solve", &loaded)? {
        Certified::Ready(p, c) => (p, c),
        Certified::Failed(payload) => {
            let path = write_report(&args.out, &payload, start)?;
            return Ok(failure_outcome(EXIT_CERTIFICATION, &payload, &path));
        }
    };
    let c = &loaded.config;
    let expanded = loaded.expand()?;
    let mut payload = SolvePayload {
        command: "solve",
        status: Status::Converged,
        problem: summary(c, &expanded),
        certificate: Some(cert),
        solution: None,
        failures: Vec::new(),
    };
    match solve_neumann(&problem.op, &problem.u, c.tol, c.max_iter) {
        Ok(sol) => {
            tables::write_solution(&args.out.join(SOLUTION_FILE), &sol.phi)?;
            tables::write_coeffs(&args.out.join(COEFFS_FILE), &sol.phi)?;
            let line = format!(
                "converged in {} iterations, residual {:.3e}, error bound {:.3e}",
                sol.iterations, sol.residual, sol.aposteriori_bound
            );
            payload.solution = Some(SolutionSummary::new(&sol));
            let path = write_report(&args.out, &payload, start)?;
            Ok(Outcome { code: EXIT_OK, stdout: format!("{line} (report: {})\n", path.display()) })
        }
        Err(e) => {
            let code = match e {
                feq_core::Error::ContractionViolation { .. } => {
                    payload.status = Status::CertificationFailed;
                    EXIT_CERTIFICATION
                }
                _ => {
                    payload.status = Status::NonConvergence;
                    EXIT_NON_CONVERGENCE
                }
            };
            payload.failures.push(Failure::from(&e));
            let path = write_report(&args.out, &payload, start)?;
            Ok(failure_outcome(code, &payload, &path))
        }
    }
}

/// Hypothesis certificate only. Exit 0 iff it passes.
pub fn certify(args: &RunArgs) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let loaded = load(args)?;
    match certify_problem("certify", &loaded)? {
        Certified::Ready(_, cert) => {
            let expanded = loaded.expand()?;
            let line = format!("certificate passed, rho = {} (real {})", cert.rho_strip, cert.rho_real);
            let payload = SolvePayload {
                command: "certify",
                status: Status::Pass,
                problem: summary(&loaded.config, &expanded),
                certificate: Some(cert),
                solution: None,
                failures: Vec::new(),
            };
            let path = write_report(&args.out, &payload, start)?;
            Ok(Outcome { code: EXIT_OK, stdout: format!("{line} (report: {})\n", path.display()) })
        }
        Certified::Failed(mut payload) => {
            payload.command = "certify";
            let path = write_report(&args.out, &payload, start)?;
            Ok(failure_outcome(EXIT_CERTIFICATION, &payload, &path))
        }
    }
}

/// Writes `payload` to `out/report.json` when asked and returns it as text.
fn emit<P: serde::Serialize>(payload: P, out: Option<&Path>, start: Instant) -> Result<Outcome, CliError> {
    let text = to_json(&payload);
    if let Some(dir) = out {
        write_report(dir, &payload, start)?;
    }
    Ok(Outcome { code: EXIT_OK, stdout: text })
}

pub fn lambda(expression: &str, n_max: Option<usize>, out: Option<&Path>) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let psi = parse_expr(expression).map_err(|e| CliError::Input(format!("{expression:?}: parse error {e}")))?;
    let report = estimate_lambda(&psi, n_max.unwrap_or(DEFAULT_LAMBDA_ORDER))
        .map_err(|e| CliError::Input(format!("{expression:?}: {e}")))?;
    emit(LambdaPayload { command: "lambda", expression: expression.to_string(), report }, out, start)
}

pub fn diagnose(coeffs: &Path, k: f64, out: Option<&Path>) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let values = tables::read_coeffs(coeffs)?;
    let count = values.len();
    let rep = ChebRep::from_coeffs(values, 0.0);
    let fit = fit_coeff_decay(&rep, k).map_err(|e| CliError::Input(format!("{}: {e}", coeffs.display())))?;
    let source = coeffs.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    emit(DiagnosePayload { command: "diagnose", source, coefficients: count, fit }, out, start)
}

/// The config of instance `id` as JSON text, also written to `out` if given.
pub fn export_example(id: u32, out: Option<&Path>) -> Result<Outcome, CliError> {
    let config = example_config(id).map_err(|e| CliError::Input(e.to_string()))?;
    let text = to_json(&config);
    if let Some(path) = out {
        write_atomic(path, text.as_bytes()).map_err(|e| CliError::io(path, e))?;
    }
    Ok(Outcome { code: EXIT_OK, stdout: text })
}
