//! One evaluator, three number types: IEEE doubles, complex doubles and
//! truncated Taylor series ("jets"). Sharing the traversal keeps the real and
//! complex results bitwise consistent on the real axis.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{Expr, IntArg};
use crate::error::EvalError;

pub(crate) trait Scalar: Clone {
    fn constant(c: f64, like: &Self) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Result<Self, EvalError>;
    fn neg(&self) -> Self;
    fn scale(&self, s: f64) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    /// Point value (order-zero part for jets) as a complex number.
    fn point(&self) -> Complex64;
}

/// Observer for denominators met during evaluation.
pub(crate) trait Watch {
    fn denominator(&mut self, value: Complex64);
}

pub(crate) struct NoWatch;

impl Watch for NoWatch {
    #[inline]
    fn denominator(&mut self, _: Complex64) {}
}

pub(crate) struct MinDenominator(pub f64);

/// Every denominator value met during one evaluation, in traversal order.
pub(crate) struct DenominatorTrace(pub Vec<Complex64>);

impl Watch for DenominatorTrace {
    fn denominator(&mut self, value: Complex64) {
        self.0.push(value);
    }
}

impl Watch for MinDenominator {
    fn denominator(&mut self, value: Complex64) {
        let modulus = libm::hypot(value.re, value.im);
        if modulus < self.0 {
            self.0 = modulus;
        }
    }
}

impl Scalar for f64 {
    fn constant(c: f64, _: &Self) -> Self {
        c
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Result<Self, EvalError> {
        if *rhs == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        Ok(self / rhs)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn sin(&self) -> Self {
        libm::sin(*self)
    }
    fn cos(&self) -> Self {
        libm::cos(*self)
    }
    fn point(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}

/// Complex double. Division uses Smith's algorithm so that a purely real
/// quotient is computed exactly as the real division would be.
#[derive(Clone, Copy, Debug)]
pub(crate) struct C64(pub Complex64);

impl Scalar for C64 {
    fn constant(c: f64, _: &Self) -> Self {
        C64(Complex64::new(c, 0.0))
    }
    fn add(&self, rhs: &Self) -> Self {
        C64(self.0 + rhs.0)
    }
    fn sub(&self, rhs: &Self) -> Self {
        C64(self.0 - rhs.0)
    }
    fn mul(&self, rhs: &Self) -> Self {
        C64(self.0 * rhs.0)
    }
    fn div(&self, rhs: &Self) -> Result<Self, EvalError> {
        let (a, b) = (self.0.re, self.0.im);
        let (c, d) = (rhs.0.re, rhs.0.im);
        if c == 0.0 && d == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        Ok(C64(if libm::fabs(c) >= libm::fabs(d) {
            let r = d / c;
            let den = c + d * r;
            Complex64::new((a + b * r) / den, (b - a * r) / den)
        } else {
            let r = c / d;
            let den = c * r + d;
            Complex64::new((a * r + b) / den, (b * r - a) / den)
        }))
    }
    fn neg(&self) -> Self {
        C64(-self.0)
    }
    fn scale(&self, s: f64) -> Self {
        C64(self.0 * s)
    }
    fn sin(&self) -> Self {
        let (x, y) = (self.0.re, self.0.im);
        C64(Complex64::new(libm::sin(x) * libm::cosh(y), libm::cos(x) * libm::sinh(y)))
    }
    fn cos(&self) -> Self {
        let (x, y) = (self.0.re, self.0.im);
        C64(Complex64::new(libm::cos(x) * libm::cosh(y), -(libm::sin(x) * libm::sinh(y))))
    }
    fn point(&self) -> Complex64 {
        self.0
    }
}

/// Truncated Taylor series `Σ c_j h^j`, `j = 0..=order`, around a point.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Jet(Vec<f64>);

impl Jet {
    pub(crate) fn variable(x: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x;
        if order > 0 {
            c[1] = 1.0;
        }
        Jet(c)
    }

    pub(crate) fn into_coeffs(self) -> Vec<f64> {
        self.0
    }

    fn sin_cos(&self) -> (Jet, Jet) {
        let u = &self.0;
        let len = u.len();
        let mut s = vec![0.0; len];
        let mut c = vec![0.0; len];
        s[0] = libm::sin(u[0]);
        c[0] = libm::cos(u[0]);
        // s' = c u', c' = -s u'
        for k in 1..len {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for j in 1..=k {
                let w = j as f64 * u[j];
                ds += w * c[k - j];
                dc += w * s[k - j];
            }
            s[k] = ds / k as f64;
            c[k] = -dc / k as f64;
        }
        (Jet(s), Jet(c))
    }
}

impl Scalar for Jet {
    fn constant(c: f64, like: &Self) -> Self {
        let mut v = vec![0.0; like.0.len()];
        v[0] = c;
        Jet(v)
    }
    fn add(&self, rhs: &Self) -> Self {
        Jet(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
    fn sub(&self, rhs: &Self) -> Self {
        Jet(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
    fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        Jet((0..a.len()).map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum()).collect())
    }
    fn div(&self, rhs: &Self) -> Result<Self, EvalError> {
        let (a, b) = (&self.0, &rhs.0);
        if b[0] == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        let mut q = vec![0.0; a.len()];
        for k in 0..a.len() {
            let mut acc = a[k];
            for j in 1..=k {
                acc -= b[j] * q[k - j];
            }
            q[k] = acc / b[0];
        }
        Ok(Jet(q))
    }
    fn neg(&self) -> Self {
        Jet(self.0.iter().map(|a| -a).collect())
    }
    fn scale(&self, s: f64) -> Self {
        Jet(self.0.iter().map(|a| a * s).collect())
    }
    fn sin(&self) -> Self {
        self.sin_cos().0
    }
    fn cos(&self) -> Self {
        self.sin_cos().1
    }
    fn point(&self) -> Complex64 {
        Complex64::new(self.0[0], 0.0)
    }
}

fn fixed(m: &IntArg) -> Result<u32, EvalError> {
    match m {
        IntArg::Fixed(v) => Ok(*v),
        IntArg::Indexed(_) => Err(EvalError::UnboundIndex),
    }
}

fn powi<S: Scalar>(base: S, mut p: u32) -> S {
    if p == 0 {
        return S::constant(1.0, &base);
    }
    let mut acc: Option<S> = None;
    let mut sq = base;
    loop {
        if p & 1 == 1 {
            acc = Some(match acc {
                None => sq.clone(),
                Some(a) => a.mul(&sq),
            });
        }
        p >>= 1;
        if p == 0 {
            break;
        }
        sq = sq.mul(&sq);
    }
    acc.expect("p > 0 sets at least one bit")
}

pub(crate) fn eval<S: Scalar, W: Watch>(e: &Expr, x: &S, watch: &mut W) -> Result<S, EvalError> {
    Ok(match e {
        Expr::Const(c) => S::constant(*c, x),
        Expr::X => x.clone(),
        Expr::Index => return Err(EvalError::UnboundIndex),
        Expr::Neg(a) => eval(a, x, watch)?.neg(),
        Expr::Sin(a) => eval(a, x, watch)?.sin(),
        Expr::Cos(a) => eval(a, x, watch)?.cos(),
        Expr::Add(a, b) => eval(a, x, watch)?.add(&eval(b, x, watch)?),
        Expr::Sub(a, b) => eval(a, x, watch)?.sub(&eval(b, x, watch)?),
        Expr::Mul(a, b) => eval(a, x, watch)?.mul(&eval(b, x, watch)?),
        Expr::Div(a, b) => {
            let num = eval(a, x, watch)?;
            let den = eval(b, x, watch)?;
            watch.denominator(den.point());
            num.div(&den)?
        }
        Expr::Pow(a, m) => {
            let p = fixed(m)?;
            powi(eval(a, x, watch)?, p)
        }
        Expr::Iter(f, m) => {
            let mut v = x.clone();
            for _ in 0..fixed(m)? {
                v = eval(f, &v, watch)?;
            }
            v
        }
        Expr::IterScaled(f, m) => {
            let m = fixed(m)?;
            let mut v = x.scale(libm::ldexp(1.0, 1 - m.max(1) as i32));
            for _ in 0..m {
                v = eval(f, &v, watch)?;
            }
            v
        }
        Expr::Compose(outer, inner) => {
            let v = eval(inner, x, watch)?;
            eval(outer, &v, watch)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    #[test]
    fn complex_sin_at_i() {
        let z = Expr::X.sin().eval_complex(Complex64::new(0.0, 1.0)).unwrap();
        assert_eq!(z.re, 0.0);
        assert!((z.im - 1.1752011936438014).abs() < 1e-15);
    }

    #[test]
    fn square_at_one_plus_i() {
        let z = Expr::X.powi(2).eval_complex(Complex64::new(1.0, 1.0)).unwrap();
        assert_eq!(z, Complex64::new(0.0, 2.0));
        let c = Expr::Const(0.5).eval_complex(Complex64::new(-3.0, 7.0)).unwrap();
        assert_eq!(c, Complex64::new(0.5, 0.0));
    }

    #[test]
    fn real_examples() {
        assert_eq!(Expr::X.sin().eval_real(0.0).unwrap(), 0.0);
        let s1 = parse_expr("iter_scaled(sin, 1)").unwrap().eval_real(1.0).unwrap();
        assert_eq!(s1, libm::sin(1.0));
        assert!((s1 - 0.8414709848).abs() < 1e-10);
        let s2 = Expr::X.sin().iterate(2).unwrap().eval_real(1.0).unwrap();
        assert!((s2 - 0.7456241417).abs() < 1e-10);
    }

    #[test]
    fn division_by_zero() {
        let e = parse_expr("1 / x").unwrap();
        assert_eq!(e.eval_real(0.0), Err(EvalError::DivisionByZero));
        assert_eq!(e.eval_complex(Complex64::new(0.0, 0.0)), Err(EvalError::DivisionByZero));
        assert_eq!(e.taylor(0.0, 3), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn smith_division_matches_real_division_on_axis() {
        let e = parse_expr("x^2 / (3 * (x^2 + 1))").unwrap();
        for i in 0..=20 {
            let x = -1.0 + 0.1 * i as f64;
            let r = e.eval_real(x).unwrap();
            let z = e.eval_complex(Complex64::new(x, 0.0)).unwrap();
            assert_eq!(z.re, r);
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn powers_by_squaring() {
        for p in 0..12u32 {
            let v = Expr::X.powi(p).eval_real(1.1).unwrap();
            assert!((v - libm::pow(1.1, f64::from(p))).abs() < 1e-14 * v.abs());
        }
        assert_eq!(Expr::X.powi(0).eval_real(0.0).unwrap(), 1.0);
    }

    #[test]
    fn jets_of_sin_are_taylor_coefficients() {
        let t = Expr::X.sin().taylor(0.0, 7).unwrap();
        let expected = [0.0, 1.0, 0.0, -1.0 / 6.0, 0.0, 1.0 / 120.0, 0.0, -1.0 / 5040.0];
        for (a, b) in t.iter().zip(expected) {
            assert!((a - b).abs() < 1e-16);
        }
        // 1/(1-x) = Σ x^j
        let t = parse_expr("1 / (1 - x)").unwrap().taylor(0.0, 10).unwrap();
        assert!(t.iter().all(|c| (c - 1.0).abs() < 1e-15));
    }

    #[test]
    fn min_denominator_tracks_smallest_modulus() {
        let e = parse_expr("1 / (x - 0.5)").unwrap();
        let pts = [Complex64::new(0.0, 0.0), Complex64::new(0.4, 0.0)];
        let m = e.min_denominator(&pts).unwrap();
        assert!((m - 0.1).abs() < 1e-15);
        assert_eq!(Expr::X.min_denominator(&pts).unwrap(), f64::INFINITY);
    }
}
