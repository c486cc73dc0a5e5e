#![no_std]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod cheb;
pub mod error;
pub mod operator;
pub mod solver;
pub mod suite;
pub mod strip;
pub mod expr;

pub use error::{Error, EvalError, Result};
pub use expr::{parse_expr, Expr, FunctionExpr, IntArg, ParseError};
pub use cheb::{ChebRep, InterpOptions, SupNorm};
pub use strip::{check_ek, dist_to_interval, estimate_lambda, strip_radius, strip_sup_norm, EkCertificate, LambdaReport, StripDomain};
pub use operator::{AkCertificate, OperatorSpec, TermSpec};
pub use solver::{apriori_bound, fit_coeff_decay, residual, solve_neumann, DecayFit, Solution};
pub use suite::{named_family, oracle_example1, paper_example, Family, ProblemSpec};
