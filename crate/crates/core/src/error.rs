use alloc::vec::Vec;

use crate::expr::ParseError;

/// Failure while evaluating an expression at a point.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("family index `n` is not bound; instantiate the expression first")]
    UnboundIndex,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parse error {0}")]
    Parse(#[from] ParseError),

    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("point {x} lies outside [-1, 1]")]
    OutsideInterval { x: f64 },

    /// Adaptive interpolation did not resolve the function. `envelope` holds
    /// the magnitudes of the trailing coefficients at the last degree tried.
    #[error("resolution exceeded at degree {degree}")]
    ResolutionExceeded { degree: usize, envelope: Vec<f64> },

    #[error("inner map of term {term} leaves [-1, 1]: phi({x}) = {value}")]
    InvalidMap { term: usize, x: f64, value: f64 },

    #[error("a denominator of term {term} nearly vanishes on the strip (min modulus {min_modulus:e})")]
    DenominatorVanishes { term: usize, min_modulus: f64 },

    #[error("operator is not a contraction: rho = {rho}")]
    ContractionViolation { rho: f64 },

    #[error("no convergence after {iterations} iterations (last increment {increment:e})")]
    NonConvergence { iterations: usize, increment: f64 },

    #[error("too few coefficients above the floor: {found} < {needed}")]
    TooFewCoefficients { found: usize, needed: usize },

    #[error("unknown example id {0}")]
    UnknownExample(u32),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
