//! The four canonical equations with fixed choices for their free sequences.
//!
//! Every instance uses `u = -x`, `k = 1` and half-width `sigma = 0.5`. Sums
//! run over `n = 1..=N`; the discarded terms are covered by closed-form tail
//! bounds on the interval and on the stadium.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::cheb::{interpolate, ChebRep, DEFAULT_MAX_DEGREE, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::operator::{OperatorSpec, TermSpec};

pub const EXAMPLE_SIGMA: f64 = 0.5;
pub const EXAMPLE_RHS: &str = "-x";
/// Truncation rule for infinite families: keep terms until the tail is below
/// this.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;

/// One row of a family: coefficient and inner map as expression text, with the
/// index variable `n` already substituted.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyTerm {
    pub a: String,
    pub phi: String,
}

/// A truncated family with both tail bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub name: &'static str,
    pub terms: Vec<FamilyTerm>,
    pub tail_bound: f64,
    pub tail_bound_strip: f64,
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub id: u32,
    pub op: OperatorSpec,
    pub u: Expr,
    pub k: f64,
    pub notes: &'static str,
}

impl ProblemSpec {
    /// Chebyshev interpolant of the right-hand side.
    pub fn rhs(&self) -> Result<ChebRep> {
        let u = &self.u;
        interpolate(|x| u.eval_real(x).unwrap_or(f64::NAN), DEFAULT_TOL, DEFAULT_MAX_DEGREE)
    }
}

const FAMILY_NAMES: [&str; 4] = ["example1", "example2", "example3", "example4"];

struct Template {
    a: &'static str,
    phi: &'static str,
    notes: &'static str,
}

const TEMPLATES: [Template; 4] = [
    Template { a: "0.5", phi: "sin(x)", notes: "single term, no free parameters" },
    Template {
        a: "1/2^(n+2)",
        phi: "sin(x/(n+1))",
        notes: "g = sin, P_n(x) = x/(n+1), a_n = 2^-(n+2), u = -x",
    },
    Template {
        a: "x^2 / (2^(n+1) * (x^2 + 1))",
        phi: "sin(sin(x - 1/n))",
        notes: "alpha_n = 1/n, u = -x",
    },
    Template {
        a: "cos((-1)^n * x) / 2^(n+1)",
        phi: "iter_scaled(sin, n)",
        notes: "eps_n = (-1)^n, u = -x",
    },
];

fn check_id(id: u32) -> Result<usize> {
    match id {
        1..=4 => Ok(id as usize - 1),
        _ => Err(Error::UnknownExample(id)),
    }
}

/// Interval and stadium tail bounds of the terms `n > count`.
///
/// On the stadium of half-width `s`: `|z^2/(z^2+1)| <= (1+s)/(1-s)` because
/// `Re(z^2 + 1) >= 1 - s^2`, and `|cos z| <= cosh(s)`.
pub fn tail_bounds(id: u32, count: u32, sigma: f64) -> Result<(f64, f64)> {
    check_id(id)?;
    let n = i32::try_from(count).unwrap_or(i32::MAX);
    let (real, strip) = match id {
        1 => (0.0, 0.0),
        2 => (libm::ldexp(1.0, -(n + 2)), libm::ldexp(1.0, -(n + 2))),
        3 => {
            if !(sigma < 1.0) {
                return Err(Error::InvalidArgument("example 3 needs sigma < 1"));
            }
            let t = libm::ldexp(1.0, -(n + 2));
            (t, 2.0 * t * (1.0 + sigma) / (1.0 - sigma))
        }
        _ => {
            let t = libm::ldexp(1.0, -(n + 1));
            (t, t * libm::cosh(sigma))
        }
    };
    Ok((real, strip))
}

/// Smallest count whose interval tail is at most `eps`.
pub fn truncation_for(id: u32, eps: f64) -> Result<u32> {
    check_id(id)?;
    if id == 1 {
        return Ok(1);
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("tail tolerance must be positive"));
    }
    let mut count = 1;
    while tail_bounds(id, count, EXAMPLE_SIGMA)?.0 > eps {
        count += 1;
    }
    Ok(count)
}

/// Looks up a family by name (`example1` … `example4`) and expands `count`
/// terms. `example1` is finite and always has one term.
pub fn named_family(name: &str, count: u32, sigma: f64) -> Result<Family> {
    let idx = FAMILY_NAMES
        .iter()
        .position(|n| *n == name)
        .ok_or(Error::InvalidArgument("unknown family name"))?;
    if count == 0 {
        return Err(Error::InvalidArgument("family count must be at least 1"));
    }
    let id = idx as u32 + 1;
    let template = &TEMPLATES[idx];
    let count = if id == 1 { 1 } else { count };
    let (tail_bound, tail_bound_strip) = tail_bounds(id, count, sigma)?;
    let terms = (1..=count)
        .map(|n| FamilyTerm {
            a: substitute_index(template.a, n),
            phi: substitute_index(template.phi, n),
        })
        .collect();
    Ok(Family { name: FAMILY_NAMES[idx], terms, tail_bound, tail_bound_strip })
}

/// Replaces the identifier `n` with its value, in parentheses.
fn substitute_index(text: &str, n: u32) -> String {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len() + 8);
    for (i, ch) in text.char_indices() {
        let ident = |j: usize| bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_';
        let standalone = ch == 'n'
            && (i == 0 || !ident(i - 1))
            && (i + 1 == bytes.len() || !ident(i + 1));
        if standalone {
            out.push_str(&format!("({n})"));
        } else {
            out.push(ch);
        }
    }
    out
}

impl Family {
    pub fn build(&self, sigma: f64, k: f64) -> Result<OperatorSpec> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            terms.push(TermSpec::new(parse_expr(&t.a)?, parse_expr(&t.phi)?, sigma));
        }
        OperatorSpec::build_with_strip_tail(terms, self.tail_bound, self.tail_bound_strip, k)
    }
}

/// Instance `id` truncated after `trunc_n` terms (ignored for the finite
/// first instance).
pub fn paper_example(id: u32, trunc_n: u32) -> Result<ProblemSpec> {
    let idx = check_id(id)?;
    if id > 1 && trunc_n == 0 {
        return Err(Error::InvalidArgument("truncation must keep at least one term"));
    }
    let family = named_family(FAMILY_NAMES[idx], trunc_n.max(1), EXAMPLE_SIGMA)?;
    Ok(ProblemSpec {
        id,
        op: family.build(EXAMPLE_SIGMA, 1.0)?,
        u: parse_expr(EXAMPLE_RHS)?,
        k: 1.0,
        notes: TEMPLATES[idx].notes,
    })
}

/// `-Σ_{n<n_terms} 2^-n·sin^n(x)` by direct summation, with the bound
/// `2^-(n_terms-1)` on the omitted terms.
pub fn oracle_example1(x: f64, n_terms: u32) -> (f64, f64) {
    let mut iterate = x;
    let mut weight = 1.0;
    let mut sum = 0.0;
    for _ in 0..n_terms {
        sum -= weight * iterate;
        iterate = libm::sin(iterate);
        weight *= 0.5;
    }
    let tail = libm::ldexp(1.0, 1 - i32::try_from(n_terms).unwrap_or(i32::MAX));
    (sum, tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_substitution_is_whole_word() {
        assert_eq!(substitute_index("sin(x/(n+1))", 3), "sin(x/((3)+1))");
        assert_eq!(substitute_index("iter_scaled(sin, n)", 2), "iter_scaled(sin, (2))");
    }

    #[test]
    fn example1_matches_direct_instance() {
        let p = paper_example(1, 99).unwrap();
        assert_eq!(p.op.terms().len(), 1);
        assert_eq!(p.op.tail_bound(), 0.0);
        assert_eq!(p.op.contraction_real().unwrap(), 0.5);
        assert_eq!(p.k, 1.0);
    }

    #[test]
    fn truncated_contraction_constants() {
        let p = paper_example(3, 30).unwrap();
        assert_eq!(p.op.terms().len(), 30);
        assert!((p.op.contraction_real().unwrap() - 0.25).abs() <= 1e-12);
        let p = paper_example(4, 30).unwrap();
        let rho = p.op.contraction_real().unwrap();
        assert!(rho > 0.49 && rho <= 0.5 + 1e-9);
        let p = paper_example(2, 10).unwrap();
        assert!((p.op.contraction_real().unwrap() - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn strip_contraction_stays_below_one() {
        for id in 1..=4 {
            let p = paper_example(id, 12).unwrap();
            let rho = p.op.contraction_strip(256).unwrap();
            assert!(rho < 1.0, "id {id}: {rho}");
        }
    }

    #[test]
    fn unknown_ids_and_names() {
        assert!(matches!(paper_example(5, 10), Err(Error::UnknownExample(5))));
        assert!(matches!(paper_example(0, 10), Err(Error::UnknownExample(0))));
        assert!(paper_example(3, 0).is_err());
        assert!(named_family("example9", 3, 0.5).is_err());
    }

    #[test]
    fn truncation_rule() {
        assert_eq!(truncation_for(1, 1e-12).unwrap(), 1);
        let n = truncation_for(3, 1e-12).unwrap();
        assert!(tail_bounds(3, n, 0.5).unwrap().0 <= 1e-12);
        assert!(tail_bounds(3, n - 1, 0.5).unwrap().0 > 1e-12);
    }

    #[test]
    fn oracle_basics() {
        assert_eq!(oracle_example1(0.0, 60).0, 0.0);
        let (v, tail) = oracle_example1(0.7, 60);
        assert_eq!(oracle_example1(-0.7, 60).0, -v);
        assert_eq!(tail, libm::ldexp(1.0, -59));
        let (two, _) = oracle_example1(1.0, 2);
        assert_eq!(two, -1.0 - 0.5 * libm::sin(1.0));
    }
}
