//! Symbolic differentiation. The builders below fold constants and drop
//! additive zeros and multiplicative ones so derivatives stay readable;
//! they never rewrite anything else.

use alloc::boxed::Box;

use super::{Expr, IntArg};
use crate::error::{Error, Result};

fn konst(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        _ => None,
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => Expr::Const(x + y),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => a + b,
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => Expr::Const(x - y),
        (_, Some(0.0)) => a,
        (Some(0.0), _) => neg(b),
        _ => a - b,
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => Expr::Const(x * y),
        (Some(0.0), _) | (_, Some(0.0)) => Expr::Const(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        _ => a * b,
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) if y != 0.0 => Expr::Const(x / y),
        (Some(0.0), _) => Expr::Const(0.0),
        (_, Some(1.0)) => a,
        _ => a / b,
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        other => -other,
    }
}

fn pow(a: Expr, p: u32) -> Expr {
    match (p, konst(&a)) {
        (0, _) => Expr::Const(1.0),
        (1, _) => a,
        (_, Some(c)) => Expr::Const(libm::pow(c, f64::from(p))),
        _ => a.powi(p),
    }
}

/// `outer(inner(x))`, collapsing the trivial cases.
fn compose(outer: Expr, inner: Expr) -> Expr {
    if matches!(inner, Expr::X) || outer.is_x_free() {
        return outer;
    }
    if matches!(outer, Expr::X) {
        return inner;
    }
    Expr::Compose(Box::new(outer), Box::new(inner))
}

fn fixed(m: &IntArg) -> Result<u32> {
    match m {
        IntArg::Fixed(v) => Ok(*v),
        IntArg::Indexed(_) => Err(Error::InvalidArgument(
            "cannot differentiate an x-dependent power or iterate with an unbound index",
        )),
    }
}

pub(super) fn derivative(e: &Expr) -> Result<Expr> {
    if e.is_x_free() {
        return Ok(Expr::Const(0.0));
    }
    Ok(match e {
        Expr::Const(_) | Expr::Index => Expr::Const(0.0),
        Expr::X => Expr::Const(1.0),
        Expr::Neg(a) => neg(derivative(a)?),
        Expr::Sin(a) => mul((**a).clone().cos(), derivative(a)?),
        Expr::Cos(a) => mul(neg((**a).clone().sin()), derivative(a)?),
        Expr::Add(a, b) => add(derivative(a)?, derivative(b)?),
        Expr::Sub(a, b) => sub(derivative(a)?, derivative(b)?),
        Expr::Mul(a, b) => add(
            mul(derivative(a)?, (**b).clone()),
            mul((**a).clone(), derivative(b)?),
        ),
        Expr::Div(a, b) if b.is_x_free() => div(derivative(a)?, (**b).clone()),
        Expr::Div(a, b) => div(
            sub(
                mul(derivative(a)?, (**b).clone()),
                mul((**a).clone(), derivative(b)?),
            ),
            pow((**b).clone(), 2),
        ),
        Expr::Pow(a, m) => {
            let p = fixed(m)?;
            match p {
                0 => Expr::Const(0.0),
                _ => mul(
                    mul(Expr::Const(f64::from(p)), pow((**a).clone(), p - 1)),
                    derivative(a)?,
                ),
            }
        }
        Expr::Iter(f, m) => iterate_derivative(f, fixed(m)?)?,
        Expr::IterScaled(f, m) => {
            let m = fixed(m)?;
            let s = libm::ldexp(1.0, 1 - m.max(1) as i32);
            let inner = iterate_derivative(f, m)?;
            mul(compose(inner, mul(Expr::Const(s), Expr::X)), Expr::Const(s))
        }
        Expr::Compose(outer, inner) => mul(
            compose(derivative(outer)?, (**inner).clone()),
            derivative(inner)?,
        ),
    })
}

/// d/dx f^{<m>}(x) = Π_{j<m} f'(f^{<j>}(x)).
fn iterate_derivative(f: &Expr, m: u32) -> Result<Expr> {
    let df = derivative(f)?;
    let mut acc = Expr::Const(1.0);
    for j in 0..m {
        let arg = match j {
            0 => Expr::X,
            _ => Expr::Iter(Box::new(f.clone()), IntArg::Fixed(j)),
        };
        acc = mul(acc, compose(df.clone(), arg));
    }
    Ok(acc)
}
