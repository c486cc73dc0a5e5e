//! Chebyshev series on [-1, 1]: adaptive interpolation at Chebyshev points of
//! the second kind, Clenshaw evaluation and the small algebra the solver needs.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative chop tolerance used when none is given.
pub const DEFAULT_TOL: f64 = 1e-14;
/// Largest degree adaptive interpolation will try by default.
pub const DEFAULT_MAX_DEGREE: usize = 1 << 15;
const MIN_DEGREE: usize = 16;

/// A function on [-1, 1] as `Σ c_k T_k(x)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ChebRep {
    coeffs: Vec<f64>,
    tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpOptions {
    pub tol: f64,
    pub max_degree: usize,
    /// First degree tried; rounded up to a power of two, at least 16.
    pub start_degree: usize,
}

impl Default for InterpOptions {
    fn default() -> Self {
        InterpOptions { tol: DEFAULT_TOL, max_degree: DEFAULT_MAX_DEGREE, start_degree: MIN_DEGREE }
    }
}

/// Grid sup norm together with the coefficient bound `Σ|c_k|`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SupNorm {
    pub value: f64,
    pub coeff_bound: f64,
}

/// The `n + 1` Chebyshev extreme points `cos(jπ/n)`, from `1` down to `-1`.
///
/// Written as `sin(π(n - 2j) / 2n)` so the grid is exactly antisymmetric and
/// the grid of degree `2n` contains the grid of degree `n` bit for bit.
pub fn chebyshev_points(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.0];
    }
    let den = (2 * n) as f64;
    (0..=n)
        .map(|j| libm::sin(PI * (n as f64 - 2.0 * j as f64) / den))
        .collect()
}

/// Coefficients of the degree-`n` interpolant through values at
/// `chebyshev_points(n)` (direct cosine transform, O(n²)).
fn values_to_coeffs(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    if n == 0 {
        return vec![values[0]];
    }
    let period = 2 * n;
    let table: Vec<f64> = (0..period).map(|m| libm::cos(PI * m as f64 / n as f64)).collect();
    let mut coeffs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut acc = 0.5 * (values[0] + if k % 2 == 0 { values[n] } else { -values[n] });
        for (j, v) in values.iter().enumerate().take(n).skip(1) {
            acc += v * table[(j * k) % period];
        }
        let mut c = acc * 2.0 / n as f64;
        if k == 0 || k == n {
            c *= 0.5;
        }
        coeffs.push(c);
    }
    coeffs
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, c| m.max(libm::fabs(*c)))
}

/// Adaptive interpolation of a fallible point evaluator.
pub fn try_interpolate<F>(mut f: F, opts: &InterpOptions) -> Result<ChebRep>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("interpolation tolerance must be positive"));
    }
    if opts.max_degree < MIN_DEGREE || !opts.max_degree.is_power_of_two() {
        return Err(Error::InvalidArgument("max_degree must be a power of two >= 16"));
    }
    let mut n = opts.start_degree.max(MIN_DEGREE).next_power_of_two().min(opts.max_degree);
    let mut values: Vec<f64> = chebyshev_points(n).into_iter().map(&mut f).collect::<Result<_>>()?;
    loop {
        let coeffs = values_to_coeffs(&values);
        let vscale = max_abs(&values);
        if vscale == 0.0 {
            return Ok(ChebRep { coeffs: vec![0.0], tol: opts.tol });
        }
        if !vscale.is_finite() {
            return Err(Error::InvalidArgument("function values are not finite"));
        }
        let tail_len = core::cmp::max(4, (n + 1) / 8);
        let tail = &coeffs[coeffs.len() - tail_len..];
        if tail.iter().all(|c| libm::fabs(*c) <= opts.tol * vscale) {
            return Ok(chop(&coeffs, opts.tol));
        }
        if n >= opts.max_degree {
            return Err(Error::ResolutionExceeded {
                degree: n,
                envelope: tail.iter().map(|c| libm::fabs(*c)).collect(),
            });
        }
        // the degree-2n grid interleaves new points between the old ones
        let finer = chebyshev_points(2 * n);
        let mut next = Vec::with_capacity(2 * n + 1);
        for (j, x) in finer.into_iter().enumerate() {
            next.push(if j % 2 == 0 { values[j / 2] } else { f(x)? });
        }
        values = next;
        n *= 2;
    }
}

pub fn interpolate<F: Fn(f64) -> f64>(f: F, tol: f64, max_degree: usize) -> Result<ChebRep> {
    try_interpolate(|x| Ok(f(x)), &InterpOptions { tol, max_degree, ..InterpOptions::default() })
}

/// Removes the longest trailing block with `|c_k| <= tol·max|c|`, keeping `c_0`.
pub fn chop(coeffs: &[f64], tol: f64) -> ChebRep {
    let scale = max_abs(coeffs);
    let threshold = tol * scale;
    let keep = coeffs
        .iter()
        .rposition(|c| libm::fabs(*c) > threshold)
        .map_or(1, |i| i + 1);
    let mut kept: Vec<f64> = coeffs.iter().take(keep).copied().collect();
    if kept.is_empty() {
        kept.push(0.0);
    }
    ChebRep { coeffs: kept, tol }
}

impl ChebRep {
    /// Wraps coefficients as given (no chopping).
    pub fn from_coeffs(coeffs: Vec<f64>, tol: f64) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        ChebRep { coeffs, tol }
    }

    pub fn zero(tol: f64) -> Self {
        ChebRep { coeffs: vec![0.0], tol }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    /// Clenshaw evaluation; `x` must lie in [-1, 1].
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::OutsideInterval { x });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c[1..].iter().rev() {
            let b0 = ck + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        c[0] + x * b1 - b2
    }

    /// Coefficients of the derivative series; the degree drops by one.
    pub fn differentiate(&self) -> ChebRep {
        let c = &self.coeffs;
        let n = c.len() - 1;
        if n == 0 {
            return ChebRep::zero(self.tol);
        }
        let mut d = vec![0.0; n + 1];
        // d_{k-1} = d_{k+1} + 2k c_k, with d_n = d_{n+1} = 0
        for k in (1..=n).rev() {
            d[k - 1] = d.get(k + 1).copied().unwrap_or(0.0) + 2.0 * k as f64 * c[k];
        }
        d[0] *= 0.5;
        d.truncate(n);
        ChebRep { coeffs: d, tol: self.tol }
    }

    /// `alpha·f + beta·g`, chopped at the larger tolerance.
    pub fn combine(alpha: f64, f: &ChebRep, beta: f64, g: &ChebRep) -> ChebRep {
        let len = f.coeffs.len().max(g.coeffs.len());
        let coeffs: Vec<f64> = (0..len)
            .map(|k| {
                let a = f.coeffs.get(k).copied().unwrap_or(0.0);
                let b = g.coeffs.get(k).copied().unwrap_or(0.0);
                alpha * a + beta * b
            })
            .collect();
        chop(&coeffs, f.tol.max(g.tol))
    }

    /// Max of `|f|` over a `10·(N+1)`-point Chebyshev grid (endpoints included).
    pub fn sup_norm(&self) -> SupNorm {
        let grid = chebyshev_points(10 * (self.degree() + 1) - 1);
        let value = grid.iter().fold(0.0_f64, |m, &x| m.max(libm::fabs(self.eval_unchecked(x))));
        let coeff_bound = self.coeffs.iter().map(|c| libm::fabs(*c)).sum();
        SupNorm { value, coeff_bound }
    }

    /// Grid sup norm value only.
    pub fn sup(&self) -> f64 {
        self.sup_norm().value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = DEFAULT_TOL;

    fn cheb_t(k: usize, x: f64) -> f64 {
        libm::cos(k as f64 * libm::acos(x))
    }

    #[test]
    fn points_are_antisymmetric_and_nested() {
        let p = chebyshev_points(16);
        assert_eq!(p[0], 1.0);
        assert_eq!(p[16], -1.0);
        assert_eq!(p[8], 0.0);
        for j in 0..=16 {
            assert_eq!(p[j], -p[16 - j]);
        }
        let q = chebyshev_points(32);
        for j in 0..=16 {
            assert_eq!(p[j], q[2 * j]);
        }
    }

    #[test]
    fn square_is_half_t0_plus_half_t2() {
        let r = interpolate(|x| x * x, 1e-14, DEFAULT_MAX_DEGREE).unwrap();
        assert_eq!(r.coeffs().len(), 3);
        assert!((r.coeffs()[0] - 0.5).abs() < 1e-15);
        assert!(r.coeffs()[1].abs() < 1e-15);
        assert!((r.coeffs()[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn basis_polynomial_is_recovered() {
        let r = interpolate(|x| cheb_t(5, x), TOL, DEFAULT_MAX_DEGREE).unwrap();
        assert_eq!(r.degree(), 5);
        for (k, c) in r.coeffs().iter().enumerate() {
            let expected = if k == 5 { 1.0 } else { 0.0 };
            assert!((c - expected).abs() <= 1e-14, "c_{k} = {c}");
        }
    }

    #[test]
    fn resolution_exceeded_reports_envelope() {
        let err = interpolate(libm::fabs, TOL, 64).unwrap_err();
        match err {
            Error::ResolutionExceeded { degree, envelope } => {
                assert_eq!(degree, 64);
                assert!(!envelope.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_options_are_rejected() {
        assert!(interpolate(|x| x, 0.0, 64).is_err());
        assert!(interpolate(|x| x, 1e-14, 48).is_err());
        assert!(interpolate(|x| x, 1e-14, 8).is_err());
    }

    #[test]
    fn zero_function() {
        let r = interpolate(|_| 0.0, TOL, 64).unwrap();
        assert_eq!(r.coeffs(), &[0.0]);
    }

    #[test]
    fn clenshaw_examples() {
        assert_eq!(ChebRep::from_coeffs(vec![1.0], TOL).eval(0.3).unwrap(), 1.0);
        assert_eq!(ChebRep::from_coeffs(vec![0.0, 0.0, 1.0], TOL).eval(0.5).unwrap(), -0.5);
        let s = interpolate(libm::sin, TOL, DEFAULT_MAX_DEGREE).unwrap();
        assert!((s.eval(1.0).unwrap() - libm::sin(1.0)).abs() <= 1e-13);
        assert!(matches!(s.eval(1.5), Err(Error::OutsideInterval { .. })));
    }

    #[test]
    fn derivative_examples() {
        let sq = ChebRep::from_coeffs(vec![0.5, 0.0, 0.5], TOL);
        assert_eq!(sq.differentiate().coeffs(), &[0.0, 2.0]);
        let t3 = ChebRep::from_coeffs(vec![0.0, 0.0, 0.0, 1.0], TOL);
        assert_eq!(t3.differentiate().eval(1.0).unwrap(), 9.0);
        let c = ChebRep::from_coeffs(vec![4.0], TOL).differentiate();
        assert!(c.is_zero());
        assert_eq!(c.eval(0.2).unwrap(), 0.0);
    }

    #[test]
    fn combine_examples() {
        let f = interpolate(libm::sin, TOL, DEFAULT_MAX_DEGREE).unwrap();
        assert!(ChebRep::combine(1.0, &f, -1.0, &f).is_zero());
        let one = ChebRep::from_coeffs(vec![1.0], TOL);
        let x = ChebRep::from_coeffs(vec![0.0, 1.0], TOL);
        assert_eq!(ChebRep::combine(2.0, &one, 3.0, &x).coeffs(), &[2.0, 3.0]);
        let sq = ChebRep::from_coeffs(vec![0.5, 0.0, 0.5], TOL);
        assert_eq!(ChebRep::combine(1.0, &sq, 1.0, &one).eval(1.0).unwrap(), 2.0);
    }

    #[test]
    fn sup_norm_examples() {
        let t3 = ChebRep::from_coeffs(vec![0.0, 0.0, 0.0, 1.0], TOL);
        assert_eq!(t3.sup(), 1.0);
        let p = ChebRep::from_coeffs(vec![1.5, 0.0, 0.5], TOL);
        assert_eq!(p.sup(), 2.0);
        let half_sin = interpolate(|x| 0.5 * libm::sin(x), TOL, DEFAULT_MAX_DEGREE).unwrap();
        assert!((half_sin.sup() - 0.4207354924039483).abs() < 1e-14);
        let s = half_sin.sup_norm();
        assert!(s.value <= s.coeff_bound);
    }

    #[test]
    fn chop_examples() {
        assert_eq!(chop(&[1.0, 1e-20, 1e-20], 1e-14).coeffs(), &[1.0]);
        assert_eq!(chop(&[0.0, 0.0, 0.0], 1e-14).coeffs(), &[0.0]);
        assert_eq!(chop(&[1.0, 0.5, 1e-10, 1e-16], 1e-14).coeffs(), &[1.0, 0.5, 1e-10]);
    }
}
