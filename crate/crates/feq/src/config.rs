//! Run configuration: a versioned JSON document with expressions embedded as
//! strings.

use std::fs;
use std::path::{Path, PathBuf};

use feq_core::cheb::{interpolate, ChebRep, DEFAULT_MAX_DEGREE, DEFAULT_TOL};
use feq_core::suite::{self, Family};
use feq_core::{parse_expr, Expr, OperatorSpec, TermSpec};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SOLVE_TOL: f64 = 1e-11;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_A_GRID: [f64; 3] = [0.1, 0.2, 0.4];
pub const DEFAULT_N_RANGE: [u32; 2] = [1, 50];
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 2000;
pub const DEFAULT_FAMILY_SIGMA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub a: String,
    pub phi: String,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub name: String,
    pub count: u32,
    #[serde(default = "default_family_sigma")]
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub k: f64,
    pub rhs: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
    /// Only for explicit term lists; families supply their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(rename = "A_grid", default = "default_a_grid")]
    pub a_grid: Vec<f64>,
    #[serde(default = "default_n_range")]
    pub n_range: [u32; 2],
    #[serde(default = "default_boundary_samples")]
    pub boundary_samples: usize,
}

fn default_family_sigma() -> f64 {
    DEFAULT_FAMILY_SIGMA
}
fn default_tol() -> f64 {
    DEFAULT_SOLVE_TOL
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}
fn default_a_grid() -> Vec<f64> {
    DEFAULT_A_GRID.to_vec()
}
fn default_n_range() -> [u32; 2] {
    DEFAULT_N_RANGE
}
fn default_boundary_samples() -> usize {
    DEFAULT_BOUNDARY_SAMPLES
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Syntax { path: String, line: usize, column: usize, message: String },
    #[error("{path}:{line}: {field}: {message}")]
    Invalid { path: String, line: usize, field: String, message: String },
}

/// A parsed config together with its source text, kept for error locations.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub path: PathBuf,
    text: String,
}

/// Explicit terms of a config, with named families expanded.
#[derive(Debug, Clone, PartialEq)]
pub struct Expanded {
    pub family: Option<String>,
    pub terms: Vec<TermConfig>,
    pub tail_bound: f64,
    pub tail_bound_strip: f64,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub op: OperatorSpec,
    pub u_expr: Expr,
    pub u: ChebRep,
}

/// Why a problem could not be assembled.
#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// The terms parse but violate a hypothesis (map range, poles).
    #[error("{0}")]
    Operator(feq_core::Error),
}

impl LoadedConfig {
    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| {
            let full = e.to_string();
            let suffix = format!(" at line {} column {}", e.line(), e.column());
            ConfigError::Syntax {
                path: path.display().to_string(),
                line: e.line(),
                column: e.column(),
                message: full.strip_suffix(&suffix).unwrap_or(&full).to_string(),
            }
        })?;
        let loaded = LoadedConfig { config, path: path.to_path_buf(), text: text.to_string() };
        loaded.validate()?;
        Ok(loaded)
    }

    fn invalid(&self, line: usize, field: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            path: self.path.display().to_string(),
            line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn key_error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        self.invalid(line_of_key(&self.text, key), key, message)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.config;
        if c.schema != SCHEMA_VERSION {
            return Err(self.key_error("schema", format!("unsupported schema {}, expected {SCHEMA_VERSION}", c.schema)));
        }
        if !(c.k > 0.0 && c.k.is_finite()) {
            return Err(self.key_error("k", "must be a positive number"));
        }
        if !(c.tol > 0.0) {
            return Err(self.key_error("tol", "must be positive"));
        }
        if c.max_iter == 0 {
            return Err(self.key_error("max_iter", "must be at least 1"));
        }
        if c.a_grid.is_empty() || c.a_grid.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(self.key_error("A_grid", "must be a non-empty list of positive numbers"));
        }
        let [lo, hi] = c.n_range;
        if lo == 0 || hi < lo {
            return Err(self.key_error("n_range", "must satisfy 1 <= first <= second"));
        }
        if c.boundary_samples < 64 {
            return Err(self.key_error("boundary_samples", "must be at least 64"));
        }
        match (&c.terms, &c.family) {
            (Some(_), Some(_)) => {
                return Err(self.key_error("family", "give either `terms` or `family`, not both"))
            }
            (None, None) => return Err(self.invalid(1, "terms", "one of `terms` or `family` is required")),
            (None, Some(f)) => {
                if c.tail_bound.is_some() {
                    return Err(self.key_error("tail_bound", "families supply their own tail bound"));
                }
                if f.count == 0 {
                    return Err(self.key_error("count", "must be at least 1"));
                }
                if !(f.sigma > 0.0) {
                    return Err(self.key_error("sigma", "must be positive"));
                }
            }
            (Some(terms), None) => {
                if c.tail_bound.is_some_and(|t| !(t >= 0.0 && t.is_finite())) {
                    return Err(self.key_error("tail_bound", "must be a non-negative number"));
                }
                for t in terms {
                    if !(t.sigma > 0.0 && t.sigma.is_finite()) {
                        return Err(self.key_error("sigma", "must be a positive number"));
                    }
                }
            }
        }
        Ok(())
    }

    /// The term list after family expansion, with its tail bounds.
    pub fn expand(&self) -> Result<Expanded, ConfigError> {
        let c = &self.config;
        match (&c.family, &c.terms) {
            (Some(f), _) => {
                let Family { terms, tail_bound, tail_bound_strip, .. } =
                    suite::named_family(&f.name, f.count, f.sigma).map_err(|e| self.key_error("name", e.to_string()))?;
                Ok(Expanded {
                    family: Some(f.name.clone()),
                    terms: terms.into_iter().map(|t| TermConfig { a: t.a, phi: t.phi, sigma: f.sigma }).collect(),
                    tail_bound,
                    tail_bound_strip,
                })
            }
            (None, Some(t)) => {
                let tail = c.tail_bound.unwrap_or(0.0);
                Ok(Expanded { family: None, terms: t.clone(), tail_bound: tail, tail_bound_strip: tail })
            }
            (None, None) => unreachable!("validated"),
        }
    }

    /// Parses expressions (config errors) and builds the operator (hypothesis
    /// failures are reported separately).
    pub fn build(&self, expanded: &Expanded) -> Result<Problem, BuildError> {
        let c = &self.config;
        let u_expr = self.parse_field("rhs", &c.rhs)?;
        let u = interpolate(|x| u_expr.eval_real(x).unwrap_or(f64::NAN), DEFAULT_TOL, DEFAULT_MAX_DEGREE)
            .map_err(|e| self.string_error("rhs", &c.rhs, format!("cannot be resolved on [-1, 1]: {e}")))?;

        let min_sigma = expanded.terms.iter().fold(f64::INFINITY, |m, t| m.min(t.sigma));
        if let Some(&a) = c.a_grid.iter().find(|a| **a > min_sigma) {
            return Err(self
                .key_error("A_grid", format!("width scale {a} exceeds the smallest term sigma {min_sigma}"))
                .into());
        }
        let mut specs = Vec::with_capacity(expanded.terms.len());
        for (i, t) in expanded.terms.iter().enumerate() {
            let a = self.parse_field(&format!("terms[{i}].a"), &t.a)?;
            let phi = self.parse_field(&format!("terms[{i}].phi"), &t.phi)?;
            specs.push(TermSpec::new(a, phi, t.sigma));
        }
        let op = OperatorSpec::build_with_strip_tail(specs, expanded.tail_bound, expanded.tail_bound_strip, c.k)
            .map_err(BuildError::Operator)?;
        Ok(Problem { op, u_expr, u })
    }

    fn string_error(&self, field: &str, value: &str, message: String) -> ConfigError {
        let literal = serde_json::to_string(value).unwrap_or_default();
        let line = line_of(&self.text, &literal).unwrap_or_else(|| line_of_key(&self.text, field));
        self.invalid(line, field, message)
    }

    /// Parses an x-only expression; family templates are already instantiated.
    fn parse_field(&self, field: &str, text: &str) -> Result<Expr, ConfigError> {
        let e = parse_expr(text).map_err(|e| self.string_error(field, text, format!("{text:?}: {e}")))?;
        if e.has_index() {
            return Err(self.string_error(field, text, format!("{text:?}: the family index `n` is only allowed in named families")));
        }
        Ok(e)
    }
}

/// 1-based line of the first occurrence of `needle`.
fn line_of(text: &str, needle: &str) -> Option<usize> {
    text.find(needle).map(|pos| text[..pos].matches('\n').count() + 1)
}

/// 1-based line of `"key":`, or line 1 when the key is absent.
fn line_of_key(text: &str, key: &str) -> usize {
    let quoted = format!("\"{key}\"");
    let mut start = 0;
    while let Some(off) = text[start..].find(&quoted) {
        let after = start + off + quoted.len();
        if text[after..].trim_start().starts_with(':') {
            return text[..start + off].matches('\n').count() + 1;
        }
        start = after;
    }
    1
}

/// Config reproducing instance `id`, truncated by the default tail rule.
pub fn example_config(id: u32) -> Result<RunConfig, feq_core::Error> {
    let count = suite::truncation_for(id, suite::DEFAULT_TAIL_EPS)?;
    // the nested-sine family costs about 20x more per boundary sample
    let boundary_samples = if id == 4 { 500 } else { DEFAULT_BOUNDARY_SAMPLES };
    Ok(RunConfig {
        schema: SCHEMA_VERSION,
        k: 1.0,
        rhs: suite::EXAMPLE_RHS.to_string(),
        terms: None,
        family: Some(FamilyConfig {
            name: format!("example{id}"),
            count,
            sigma: suite::EXAMPLE_SIGMA,
        }),
        tail_bound: None,
        tol: DEFAULT_SOLVE_TOL,
        max_iter: DEFAULT_MAX_ITER,
        a_grid: DEFAULT_A_GRID.to_vec(),
        n_range: DEFAULT_N_RANGE,
        boundary_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LoadedConfig, ConfigError> {
        LoadedConfig::parse(text, Path::new("c.json"))
    }

    fn build(text: &str) -> Result<Problem, BuildError> {
        let loaded = parse(text).unwrap();
        loaded.build(&loaded.expand().unwrap())
    }

    const BASE: &str = r#"{
  "schema": 1,
  "k": 1,
  "rhs": "-x",
  "terms": [
    { "a": "0.5", "phi": "sin(x)", "sigma": 0.5 }
  ]
}"#;

    #[test]
    fn defaults_fill_in() {
        let c = parse(BASE).unwrap().config;
        assert_eq!(c.tol, 1e-11);
        assert_eq!(c.max_iter, 200);
        assert_eq!(c.a_grid, vec![0.1, 0.2, 0.4]);
        assert_eq!(c.n_range, [1, 50]);
    }

    #[test]
    fn unknown_field_reports_line() {
        let text = BASE.replace("\"k\": 1,", "\"k\": 1,\n  \"bogus\": 3,");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.starts_with("c.json:4:"), "{err}");
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn bad_expression_points_at_its_line() {
        let text = BASE.replace("sin(x)", "sin(x");
        let err = build(&text).unwrap_err().to_string();
        assert!(err.starts_with("c.json:6: terms[0].phi"), "{err}");
    }

    #[test]
    fn semantic_checks() {
        let err = parse(&BASE.replace("\"k\": 1", "\"k\": -1")).unwrap_err().to_string();
        assert!(err.starts_with("c.json:3: k"), "{err}");
        let err = parse(&BASE.replace("\"schema\": 1", "\"schema\": 2")).unwrap_err().to_string();
        assert!(err.contains("unsupported schema 2"), "{err}");
        let text = BASE.replace("\"sigma\": 0.5", "\"sigma\": 0.05");
        let err = build(&text).unwrap_err().to_string();
        assert!(err.contains("A_grid"), "{err}");
    }

    #[test]
    fn index_only_in_families() {
        let err = build(&BASE.replace("\"0.5\"", "\"1/2^n\"")).unwrap_err();
        assert!(err.to_string().contains("family index"), "{err}");
    }

    #[test]
    fn range_violation_is_an_operator_error() {
        let err = build(&BASE.replace("sin(x)", "2*x")).unwrap_err();
        assert!(matches!(err, BuildError::Operator(feq_core::Error::InvalidMap { .. })));
    }

    #[test]
    fn example_configs_round_trip() {
        for id in 1..=4 {
            let c = example_config(id).unwrap();
            let text = serde_json::to_string_pretty(&c).unwrap();
            let back = parse(&text).unwrap();
            assert_eq!(back.config, c);
        }
    }
}
