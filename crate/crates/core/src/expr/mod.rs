//! A small closed expression language for scalar functions of one variable.
//!
//! Expressions are built from real literals, the variable `x`, the family
//! index `n`, `sin`, `cos`, negation, the four arithmetic operations,
//! non-negative integer powers, composition and (scaled) iteration. The
//! language is closed under differentiation, evaluates at real, complex and
//! truncated Taylor-series arguments through one generic code path, and
//! pretty-prints back to source that parses to the same tree.

mod diff;
mod eval;
mod parse;

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, EvalError, Result};

pub use parse::{parse_expr, ParseError, ParseErrorKind};

/// Integer argument of a power or an iteration. It may depend on the family
/// index `n` until the expression is instantiated.
#[derive(Debug, Clone, PartialEq)]
pub enum IntArg {
    Fixed(u32),
    /// x-free expression containing `n`.
    Indexed(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    /// Family index `n`, replaced by a literal at instantiation.
    Index,
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, IntArg),
    /// `f∘f∘…∘f` (m times), `f` written in terms of `x`.
    Iter(Box<Expr>, IntArg),
    /// `f^{<m>}(x / 2^(m-1))`.
    IterScaled(Box<Expr>, IntArg),
    /// `outer(inner(x))`. Produced by differentiation; the grammar writes
    /// composition by nesting instead.
    Compose(Box<Expr>, Box<Expr>),
}

/// Alias used where the value stands for one of the user-facing functions
/// (coefficients, inner maps, right-hand sides).
pub type FunctionExpr = Expr;

impl core::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl core::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);
binary_op!(Div, div, Div);

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn x() -> Self {
        Expr::X
    }

    pub fn sin(self) -> Self {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Self {
        Expr::Cos(Box::new(self))
    }

    pub fn powi(self, p: u32) -> Self {
        Expr::Pow(Box::new(self), IntArg::Fixed(p))
    }

    /// The m-fold composition of `self` with itself.
    pub fn iterate(&self, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("iteration count must be at least 1"));
        }
        Ok(Expr::Iter(Box::new(self.clone()), IntArg::Fixed(m)))
    }

    /// `self^{<m>}(x / 2^(m-1))`.
    pub fn iterate_scaled(&self, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("iteration count must be at least 1"));
        }
        Ok(Expr::IterScaled(Box::new(self.clone()), IntArg::Fixed(m)))
    }

    pub fn eval_real(&self, x: f64) -> Result<f64, EvalError> {
        eval::eval(self, &x, &mut eval::NoWatch)
    }

    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64, EvalError> {
        eval::eval(self, &eval::C64(z), &mut eval::NoWatch).map(|c| c.0)
    }

    /// Taylor coefficients `f^(j)(x) / j!` for `j = 0..=order`.
    pub fn taylor(&self, x: f64, order: usize) -> Result<alloc::vec::Vec<f64>, EvalError> {
        let jet = eval::Jet::variable(x, order);
        eval::eval(self, &jet, &mut eval::NoWatch).map(|j| j.into_coeffs())
    }

    /// Evaluates at each complex point and returns the smallest modulus any
    /// division node saw in its denominator (`+inf` when there is no division).
    pub fn min_denominator(&self, points: &[Complex64]) -> Result<f64, EvalError> {
        let mut watch = eval::MinDenominator(f64::INFINITY);
        for &z in points {
            eval::eval(self, &eval::C64(z), &mut watch)?;
        }
        Ok(watch.0)
    }

    /// Winding numbers of every denominator along a closed curve, one per
    /// division met during evaluation (in traversal order). By the argument
    /// principle a nonzero entry means that denominator vanishes inside the
    /// curve. The curve must be sampled densely enough that consecutive
    /// denominator values turn by less than half a revolution.
    pub fn denominator_windings(&self, closed_curve: &[Complex64]) -> Result<alloc::vec::Vec<i64>, EvalError> {
        let trace = |z: Complex64| -> Result<alloc::vec::Vec<Complex64>, EvalError> {
            let mut t = eval::DenominatorTrace(alloc::vec::Vec::new());
            eval::eval(self, &eval::C64(z), &mut t)?;
            Ok(t.0)
        };
        let Some(&first) = closed_curve.first() else {
            return Ok(alloc::vec::Vec::new());
        };
        let start = trace(first)?;
        let mut turn = alloc::vec![0.0_f64; start.len()];
        let mut prev = start.clone();
        for &z in closed_curve[1..].iter().chain(core::iter::once(&first)) {
            let cur = if z == first { start.clone() } else { trace(z)? };
            for ((t, a), b) in turn.iter_mut().zip(&prev).zip(&cur) {
                let q = b / a;
                *t += libm::atan2(q.im, q.re);
            }
            prev = cur;
        }
        Ok(turn
            .into_iter()
            .map(|t| libm::round(t / (2.0 * core::f64::consts::PI)) as i64)
            .collect())
    }

    pub fn derivative(&self) -> Result<Self> {
        diff::derivative(self)
    }

    /// True when the expression does not depend on `x`.
    pub fn is_x_free(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Index => true,
            Expr::X => false,
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) => a.is_x_free(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_x_free() && b.is_x_free()
            }
            Expr::Pow(a, _) => a.is_x_free(),
            // f∘f∘… of an x-free f is constant
            Expr::Iter(f, _) | Expr::IterScaled(f, _) => f.is_x_free(),
            Expr::Compose(outer, inner) => outer.is_x_free() || inner.is_x_free(),
        }
    }

    pub fn has_index(&self) -> bool {
        match self {
            Expr::Index => true,
            Expr::Const(_) | Expr::X => false,
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) => a.has_index(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Compose(a, b) => a.has_index() || b.has_index(),
            Expr::Pow(a, m) | Expr::Iter(a, m) | Expr::IterScaled(a, m) => {
                a.has_index() || matches!(m, IntArg::Indexed(_))
            }
        }
    }

    /// Binds the family index `n` to a literal and resolves every indexed
    /// power and iteration count.
    pub fn instantiate(&self, n: u32) -> Result<Self> {
        let bind = |e: &Expr| e.instantiate(n).map(Box::new);
        Ok(match self {
            Expr::Index => Expr::Const(f64::from(n)),
            Expr::Const(_) | Expr::X => self.clone(),
            Expr::Neg(a) => Expr::Neg(bind(a)?),
            Expr::Sin(a) => Expr::Sin(bind(a)?),
            Expr::Cos(a) => Expr::Cos(bind(a)?),
            Expr::Add(a, b) => Expr::Add(bind(a)?, bind(b)?),
            Expr::Sub(a, b) => Expr::Sub(bind(a)?, bind(b)?),
            Expr::Mul(a, b) => Expr::Mul(bind(a)?, bind(b)?),
            Expr::Div(a, b) => Expr::Div(bind(a)?, bind(b)?),
            Expr::Compose(a, b) => Expr::Compose(bind(a)?, bind(b)?),
            Expr::Pow(a, m) => Expr::Pow(bind(a)?, IntArg::Fixed(m.resolve(n, 0)?)),
            Expr::Iter(a, m) => Expr::Iter(bind(a)?, IntArg::Fixed(m.resolve(n, 1)?)),
            Expr::IterScaled(a, m) => Expr::IterScaled(bind(a)?, IntArg::Fixed(m.resolve(n, 1)?)),
        })
    }
}

impl IntArg {
    fn resolve(&self, n: u32, min: u32) -> Result<u32> {
        let value = match self {
            IntArg::Fixed(v) => *v,
            IntArg::Indexed(e) => {
                let v = e.instantiate(n)?.eval_real(0.0)?;
                integer_value(v).ok_or(Error::InvalidArgument(
                    "indexed power or iteration count is not a non-negative integer",
                ))?
            }
        };
        if value < min {
            return Err(Error::InvalidArgument("iteration count must be at least 1"));
        }
        Ok(value)
    }
}

pub(crate) fn integer_value(v: f64) -> Option<u32> {
    if v.is_finite() && v >= 0.0 && v <= f64::from(u32::MAX) && libm::trunc(v) == v {
        Some(v as u32)
    } else {
        None
    }
}

// Pretty printing. Precedence levels: sums 1, products 2, powers 3, atoms 4.
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Pow(..) => 3,
        Expr::Const(c) if c.is_sign_negative() => 0,
        _ => 4,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(e) < min_prec {
        write!(f, "({})", e)
    } else {
        write!(f, "{}", e)
    }
}

fn write_int_arg(f: &mut fmt::Formatter<'_>, m: &IntArg, wrap: bool) -> fmt::Result {
    match m {
        IntArg::Fixed(v) => write!(f, "{}", v),
        IntArg::Indexed(e) if wrap && !matches!(**e, Expr::Index) => write!(f, "({})", e),
        IntArg::Indexed(e) => write!(f, "{}", e),
    }
}

/// Writes `outer` with every occurrence of `x` replaced by `(inner)`.
fn write_substituted(f: &mut fmt::Formatter<'_>, outer: &Expr, inner: &Expr) -> fmt::Result {
    let mut text = String::new();
    fmt::write(&mut text, format_args!("{}", outer))?;
    let mut rest = text.as_str();
    // identifiers in the grammar are sin, cos, neg, iter, iter_scaled, x, n;
    // a bare `x` token is never part of a longer identifier
    while let Some(pos) = rest.find('x') {
        f.write_str(&rest[..pos])?;
        write!(f, "({})", inner)?;
        rest = &rest[pos + 1..];
    }
    f.write_str(rest)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{:?}", c),
            Expr::X => f.write_str("x"),
            Expr::Index => f.write_str("n"),
            Expr::Neg(a) => write!(f, "neg({})", a),
            Expr::Sin(a) => write!(f, "sin({})", a),
            Expr::Cos(a) => write!(f, "cos({})", a),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let (op, prec) = match self {
                    Expr::Add(..) => ("+", 1),
                    Expr::Sub(..) => ("-", 1),
                    Expr::Mul(..) => ("*", 2),
                    _ => ("/", 2),
                };
                write_child(f, a, prec)?;
                write!(f, " {} ", op)?;
                write_child(f, b, prec + 1)
            }
            Expr::Pow(a, m) => {
                write_child(f, a, 4)?;
                f.write_str("^")?;
                write_int_arg(f, m, true)
            }
            Expr::Iter(a, m) | Expr::IterScaled(a, m) => {
                let name = if matches!(self, Expr::Iter(..)) { "iter" } else { "iter_scaled" };
                write!(f, "{}({}, ", name, a)?;
                write_int_arg(f, m, false)?;
                f.write_str(")")
            }
            Expr::Compose(outer, inner) => write_substituted(f, outer, inner),
        }
    }
}
