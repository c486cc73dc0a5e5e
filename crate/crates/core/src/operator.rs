//! The substitution operator `T(f)(x) = Σ_n a_n(x)·f(phi_n(x))`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(feature = "serde")]
use serde::Serialize;

use crate::cheb::{try_interpolate, ChebRep, InterpOptions, DEFAULT_MAX_DEGREE};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::strip::{
    check_ek, check_maps_interval, real_sup_norm, stadium_boundary, strip_sup_norm, uniform_grid,
    EkCertificate, CERTIFICATE_KIND, ROUNDOFF_GUARD,
};

/// Smallest denominator modulus accepted on a term's strip.
pub const DENOMINATOR_FLOOR: f64 = 1e-10;
/// Boundary samples for the argument-principle check on denominators.
const WINDING_SAMPLES: usize = 1024;
/// Degree floor for re-interpolating `T(f)`.
pub const APPLY_MIN_DEGREE: usize = 64;

/// One term `a(x)·f(phi(x))` with the half-width `sigma` of the stadium on
/// which `a` and `phi` are claimed holomorphic.
#[derive(Debug, Clone, PartialEq)]
pub struct TermSpec {
    pub a: Expr,
    pub phi: Expr,
    pub sigma: f64,
}

impl TermSpec {
    pub fn new(a: Expr, phi: Expr, sigma: f64) -> Self {
        TermSpec { a, phi, sigma }
    }

    /// Points of the closed stadium of radius `sigma` used for sampled
    /// validation: a real grid plus four concentric boundary rings.
    fn validation_points(&self) -> Vec<Complex64> {
        let mut pts: Vec<Complex64> = uniform_grid(201).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        for frac in [0.25, 0.5, 0.75, 1.0] {
            pts.extend(stadium_boundary(self.sigma * frac, 256));
        }
        pts
    }

    fn validate(&self, index: usize) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidArgument("term sigma must be positive"));
        }
        if self.a.has_index() || self.phi.has_index() {
            return Err(Error::InvalidArgument("term contains an unbound family index"));
        }
        check_maps_interval(&self.phi, index)?;
        let pts = self.validation_points();
        let min_den = self.a.min_denominator(&pts)?.min(self.phi.min_denominator(&pts)?);
        if min_den < DENOMINATOR_FLOOR {
            return Err(Error::DenominatorVanishes { term: index, min_modulus: min_den });
        }
        let curve = stadium_boundary(self.sigma, WINDING_SAMPLES);
        for e in [&self.a, &self.phi] {
            if e.denominator_windings(&curve)?.iter().any(|w| *w != 0) {
                return Err(Error::DenominatorVanishes { term: index, min_modulus: min_den });
            }
        }
        Ok(())
    }
}

/// Truncated term family with closed-form bounds for the omitted tail.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    terms: Vec<TermSpec>,
    /// Bound on `Σ_{n >= N} ‖a_n‖` over [-1, 1].
    tail_bound: f64,
    /// Bound on `Σ_{n >= N} ‖a_n‖` over the stadia of radius `sigma_n`.
    tail_bound_strip: f64,
    k: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct AkCertificate {
    pub kind: &'static str,
    pub k: f64,
    pub a_grid: Vec<f64>,
    pub rho_real: f64,
    pub rho_strip: f64,
    pub min_sigma: f64,
    pub boundary_samples: usize,
    /// One nesting certificate of the inner-map family per tested `A`.
    pub ek: Vec<EkCertificate>,
    /// Observed index from which the strip-to-strip mapping holds, per `A`.
    pub n_a: Vec<Option<u32>>,
    /// Largest tested `A` whose nesting check passed.
    pub tau_candidate: Option<f64>,
    pub pass: bool,
}

impl OperatorSpec {
    /// Validates every term: each inner map must send [-1, 1] into itself and
    /// every denominator must stay away from zero on the term's stadium.
    pub fn build(terms: Vec<TermSpec>, tail_bound: f64, k: f64) -> Result<Self> {
        Self::build_with_strip_tail(terms, tail_bound, tail_bound, k)
    }

    pub fn build_with_strip_tail(
        terms: Vec<TermSpec>,
        tail_bound: f64,
        tail_bound_strip: f64,
        k: f64,
    ) -> Result<Self> {
        if !(tail_bound >= 0.0) || !(tail_bound_strip >= 0.0) {
            return Err(Error::InvalidArgument("tail bounds must be non-negative"));
        }
        if !(k > 0.0) {
            return Err(Error::InvalidArgument("Gevrey parameter k must be positive"));
        }
        for (i, t) in terms.iter().enumerate() {
            t.validate(i)?;
        }
        Ok(OperatorSpec { terms, tail_bound, tail_bound_strip, k })
    }

    pub fn terms(&self) -> &[TermSpec] {
        &self.terms
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn tail_bound_strip(&self) -> f64 {
        self.tail_bound_strip
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn min_sigma(&self) -> f64 {
        self.terms.iter().fold(f64::INFINITY, |m, t| m.min(t.sigma))
    }

    /// `Σ_n ‖a_n‖` on [-1, 1] (2001-point grid) plus the tail bound.
    pub fn contraction_real(&self) -> Result<f64> {
        let mut sum = 0.0;
        for t in &self.terms {
            sum += real_sup_norm(&t.a)?;
        }
        Ok(sum + self.tail_bound)
    }

    /// `Σ_n ‖a_n‖` on the stadium of radius `sigma_n` (sampled boundary) plus
    /// the strip tail bound.
    pub fn contraction_strip(&self, m: usize) -> Result<f64> {
        if m < 64 {
            return Err(Error::InvalidArgument("at least 64 boundary samples are required"));
        }
        let mut sum = 0.0;
        for t in &self.terms {
            sum += strip_sup_norm(&t.a, t.sigma, m)?;
        }
        Ok(sum + self.tail_bound_strip)
    }

    /// `T(f)(x)` by direct summation over the terms, in ascending order.
    pub fn eval_at(&self, f: &ChebRep, x: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (i, t) in self.terms.iter().enumerate() {
            let y = t.phi.eval_real(x)?;
            let y = if libm::fabs(y) <= 1.0 {
                y
            } else if libm::fabs(y) <= 1.0 + ROUNDOFF_GUARD {
                y.clamp(-1.0, 1.0)
            } else {
                return Err(Error::InvalidMap { term: i, x, value: y });
            };
            acc += t.a.eval_real(x)? * f.eval_unchecked(y);
        }
        Ok(acc)
    }

    /// `T(f)` re-interpolated from degree `max(2·deg f, 64)` upward and
    /// chopped at `f`'s tolerance.
    pub fn apply(&self, f: &ChebRep) -> Result<ChebRep> {
        if self.terms.is_empty() {
            return Ok(ChebRep::zero(f.tol()));
        }
        let opts = InterpOptions {
            tol: f.tol(),
            max_degree: DEFAULT_MAX_DEGREE,
            start_degree: (2 * f.degree()).max(APPLY_MIN_DEGREE),
        };
        try_interpolate(|x| self.eval_at(f, x), &opts)
    }

    /// Combines both contraction constants with one nesting certificate of
    /// the inner maps per width scale in `a_grid`.
    pub fn certify_ak(&self, a_grid: &[f64], n_lo: u32, n_hi: u32, m: usize) -> Result<AkCertificate> {
        let min_sigma = self.min_sigma();
        if a_grid.is_empty() {
            return Err(Error::InvalidArgument("A grid must not be empty"));
        }
        if a_grid.iter().any(|a| !(*a > 0.0) || *a > min_sigma) {
            return Err(Error::InvalidArgument("every A must lie in (0, min sigma]"));
        }
        let rho_real = self.contraction_real()?;
        let rho_strip = self.contraction_strip(m)?;
        let maps: Vec<Expr> = self.terms.iter().map(|t| t.phi.clone()).collect();
        let ek = a_grid
            .iter()
            .map(|a| check_ek(&maps, self.k, *a, n_lo, n_hi, m))
            .collect::<Result<Vec<_>>>()?;
        let n_a = ek.iter().map(|c| c.m_a).collect();
        let tau_candidate = ek
            .iter()
            .filter(|c| c.pass)
            .map(|c| c.a)
            .fold(None, |best: Option<f64>, a| Some(best.map_or(a, |b| b.max(a))));
        let pass = rho_strip < 1.0 && ek.iter().all(|c| c.pass);
        Ok(AkCertificate {
            kind: CERTIFICATE_KIND,
            k: self.k,
            a_grid: a_grid.to_vec(),
            rho_real,
            rho_strip,
            min_sigma,
            boundary_samples: m,
            ek,
            n_a,
            tau_candidate,
            pass,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::{interpolate, DEFAULT_TOL};
    use crate::expr::parse_expr;

    fn term(a: &str, phi: &str, sigma: f64) -> TermSpec {
        TermSpec::new(parse_expr(a).unwrap(), parse_expr(phi).unwrap(), sigma)
    }

    fn example1() -> OperatorSpec {
        OperatorSpec::build(vec![term("0.5", "sin(x)", 0.5)], 0.0, 1.0).unwrap()
    }

    use alloc::vec;

    #[test]
    fn example1_applied_to_constants_and_identity() {
        let op = example1();
        let one = ChebRep::from_coeffs(vec![1.0], DEFAULT_TOL);
        let t1 = op.apply(&one).unwrap();
        assert!((t1.coeffs()[0] - 0.5).abs() < 1e-15);
        assert!(t1.coeffs()[1..].iter().all(|c| c.abs() < 1e-15));
        let x = ChebRep::from_coeffs(vec![0.0, 1.0], DEFAULT_TOL);
        let tx = op.apply(&x).unwrap();
        assert!((tx.eval(1.0).unwrap() - 0.4207354924039483).abs() < 1e-14);
    }

    #[test]
    fn contraction_constants() {
        let op = example1();
        assert_eq!(op.contraction_real().unwrap(), 0.5);
        assert_eq!(op.contraction_strip(64).unwrap(), 0.5);
        let big = OperatorSpec::build(vec![term("x", "x", 0.1)], 0.0, 1.0).unwrap();
        assert!((big.contraction_strip(64).unwrap() - 1.1).abs() < 1e-15);
        assert!(op.contraction_strip(32).is_err());
    }

    #[test]
    fn empty_operator_is_zero() {
        let op = OperatorSpec::build(vec![], 0.0, 1.0).unwrap();
        assert_eq!(op.contraction_real().unwrap(), 0.0);
        let f = interpolate(libm::sin, DEFAULT_TOL, DEFAULT_MAX_DEGREE).unwrap();
        assert!(op.apply(&f).unwrap().is_zero());
    }

    #[test]
    fn build_rejects_bad_terms() {
        let err = OperatorSpec::build(vec![term("0.5", "x", 0.2), term("0.1", "2*x", 0.2)], 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidMap { term: 1, .. }));
        // pole at 0.3i lies inside the stadium of radius 0.5
        let err = OperatorSpec::build(vec![term("0.1 / (x^2 + 0.09)", "x", 0.5)], 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::DenominatorVanishes { term: 0, .. } | Error::Eval(_)));
        assert!(OperatorSpec::build(vec![term("0.1 / (x^2 + 0.09)", "x", 0.2)], 0.0, 1.0).is_ok());
        assert!(OperatorSpec::build(vec![term("0.5", "x / n", 0.2)], 0.0, 1.0).is_err());
        assert!(OperatorSpec::build(vec![], -1.0, 1.0).is_err());
    }

    #[test]
    fn clamps_roundoff_overshoot_only() {
        let op = OperatorSpec::build(vec![term("1", "x * (1 + 1e-13)", 0.2)], 0.0, 1.0).unwrap();
        let f = ChebRep::from_coeffs(vec![0.0, 1.0], DEFAULT_TOL);
        assert_eq!(op.eval_at(&f, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn certificate_examples() {
        let cert = example1().certify_ak(&[0.1, 0.2, 0.4], 1, 50, 2000).unwrap();
        assert!(cert.pass);
        assert_eq!(cert.rho_strip, 0.5);
        assert_eq!(cert.tau_candidate, Some(0.4));
        assert_eq!(cert.n_a, vec![Some(1); 3]);

        let heavy = OperatorSpec::build(vec![term("1.2", "sin(x)", 0.5)], 0.0, 1.0).unwrap();
        let cert = heavy.certify_ak(&[0.2], 1, 10, 256).unwrap();
        assert!(!cert.pass);
        assert_eq!(cert.rho_strip, 1.2);

        let sq = OperatorSpec::build(vec![term("0.5", "x^2", 0.5)], 0.0, 1.0).unwrap();
        let cert = sq.certify_ak(&[0.2], 1, 10, 256).unwrap();
        assert!(!cert.pass);
        assert!(!cert.ek[0].violations.is_empty());

        assert!(example1().certify_ak(&[0.6], 1, 10, 256).is_err());
    }
}
