//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' atom)?
//! atom   := number | 'x' | 'n' | '(' expr ')'
//!         | ('sin' | 'cos' | 'neg') '(' expr ')'
//!         | ('iter' | 'iter_scaled') '(' fn ',' expr ')'
//! fn     := 'sin' | 'cos' | 'neg' | expr
//! ```
//!
//! Unary minus applied to a literal folds into a negative literal; `neg(..)`
//! always builds a negation node. Exponents and iteration counts must be
//! x-free and resolve to integers (`n` may appear and is resolved later).

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use super::{integer_value, Expr, IntArg};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: &'static str },
    UnexpectedEnd { expected: &'static str },
    UnknownIdentifier(String),
    InvalidNumber(String),
    NonIntegerPower,
    NonIntegerCount,
}

/// Syntax error with the byte offset into the source where it was detected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at column {}: ", self.pos + 1)?;
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {:?}", c),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "expected {}, found `{}`", expected, found)
            }
            ParseErrorKind::UnexpectedEnd { expected } => {
                write!(f, "expected {}, found end of input", expected)
            }
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier `{}`", name),
            ParseErrorKind::InvalidNumber(text) => write!(f, "invalid number `{}`", text),
            ParseErrorKind::NonIntegerPower => {
                f.write_str("exponent must be an x-free non-negative integer")
            }
            ParseErrorKind::NonIntegerCount => {
                f.write_str("iteration count must be an x-free positive integer")
            }
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "{}", v),
            Tok::Ident(s) => f.write_str(s),
            Tok::Sym(c) => write!(f, "{}", c),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next_token(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(start) else {
            return Ok(None);
        };
        if b.is_ascii_digit() || b == b'.' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut exp_end = end + 1;
                if exp_end < bytes.len() && (bytes[exp_end] == b'+' || bytes[exp_end] == b'-') {
                    exp_end += 1;
                }
                if exp_end < bytes.len() && bytes[exp_end].is_ascii_digit() {
                    while exp_end < bytes.len() && bytes[exp_end].is_ascii_digit() {
                        exp_end += 1;
                    }
                    end = exp_end;
                }
            }
            let text = &self.src[start..end];
            self.pos = end;
            return text.parse::<f64>().map(|v| Some((start, Tok::Num(v)))).map_err(|_| ParseError {
                pos: start,
                kind: ParseErrorKind::InvalidNumber(text.to_owned()),
            });
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            return Ok(Some((start, Tok::Ident(self.src[start..end].to_owned()))));
        }
        match b {
            b'+' | b'-' | b'*' | b'/' | b'^' | b'(' | b')' | b',' => {
                self.pos += 1;
                Ok(Some((start, Tok::Sym(b as char))))
            }
            _ => {
                let c = self.src[start..].chars().next().unwrap_or('\u{fffd}');
                Err(ParseError { pos: start, kind: ParseErrorKind::UnexpectedChar(c) })
            }
        }
    }
}

struct Parser {
    toks: alloc::vec::Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.idx + offset).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            Some(t) => ParseError {
                pos: self.pos(),
                kind: ParseErrorKind::UnexpectedToken { found: alloc::format!("{}", t), expected },
            },
            None => ParseError { pos: self.end, kind: ParseErrorKind::UnexpectedEnd { expected } },
        }
    }

    fn expect_sym(&mut self, c: char, expected: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.idx += 1;
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Sym('+')) => {
                    self.idx += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Sym('-')) => {
                    self.idx += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Sym('*')) => {
                    self.idx += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Sym('/')) => {
                    self.idx += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Sym('-')) {
            self.idx += 1;
            return Ok(match self.unary()? {
                Expr::Const(c) => Expr::Const(-c),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Sym('^')) {
            return Ok(base);
        }
        self.idx += 1;
        let pos = self.pos();
        let exponent = if self.peek() == Some(&Tok::Sym('-')) {
            // negative exponents are rejected below
            self.unary()?
        } else {
            self.atom()?
        };
        let arg = int_arg(exponent, 0)
            .ok_or(ParseError { pos, kind: ParseErrorKind::NonIntegerPower })?;
        Ok(Expr::Pow(Box::new(base), arg))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::Sym('(')) => {
                let e = self.expr()?;
                self.expect_sym(')', "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "x" => Ok(Expr::X),
                "n" => Ok(Expr::Index),
                "sin" | "cos" | "neg" => {
                    self.expect_sym('(', "`(`")?;
                    let arg = Box::new(self.expr()?);
                    self.expect_sym(')', "`)`")?;
                    Ok(match name.as_str() {
                        "sin" => Expr::Sin(arg),
                        "cos" => Expr::Cos(arg),
                        _ => Expr::Neg(arg),
                    })
                }
                "iter" | "iter_scaled" => {
                    self.expect_sym('(', "`(`")?;
                    let f = self.function_arg()?;
                    self.expect_sym(',', "`,`")?;
                    let count_pos = self.pos();
                    let count = self.expr()?;
                    self.expect_sym(')', "`)`")?;
                    let count = int_arg(count, 1).ok_or(ParseError {
                        pos: count_pos,
                        kind: ParseErrorKind::NonIntegerCount,
                    })?;
                    Ok(if name == "iter" {
                        Expr::Iter(Box::new(f), count)
                    } else {
                        Expr::IterScaled(Box::new(f), count)
                    })
                }
                _ => Err(ParseError { pos, kind: ParseErrorKind::UnknownIdentifier(name) }),
            },
            Some(_) => {
                self.idx -= 1;
                Err(self.unexpected("an operand"))
            }
            None => Err(ParseError { pos, kind: ParseErrorKind::UnexpectedEnd { expected: "an operand" } }),
        }
    }

    /// First argument of `iter`: a bare function name or an expression in `x`.
    fn function_arg(&mut self) -> Result<Expr, ParseError> {
        if let (Some(Tok::Ident(name)), Some(Tok::Sym(','))) = (self.peek(), self.peek_at(1)) {
            let bare = match name.as_str() {
                "sin" => Some(Expr::X.sin()),
                "cos" => Some(Expr::X.cos()),
                "neg" => Some(-Expr::X),
                _ => None,
            };
            if let Some(f) = bare {
                self.idx += 1;
                return Ok(f);
            }
        }
        self.expr()
    }
}

/// Classifies an exponent or count expression; `None` when it is not an
/// x-free integer `>= min`.
fn int_arg(e: Expr, min: u32) -> Option<IntArg> {
    if !e.is_x_free() {
        return None;
    }
    if e.has_index() {
        return Some(IntArg::Indexed(Box::new(e)));
    }
    let v = integer_value(e.eval_real(0.0).ok()?)?;
    (v >= min).then_some(IntArg::Fixed(v))
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut lexer = Lexer { src: text, pos: 0 };
    let mut toks = alloc::vec::Vec::new();
    while let Some(t) = lexer.next_token()? {
        toks.push(t);
    }
    let mut parser = Parser { toks, idx: 0, end: text.len() };
    let e = parser.expr()?;
    if parser.peek().is_some() {
        return Err(parser.unexpected("an operator or end of input"));
    }
    Ok(e)
}
