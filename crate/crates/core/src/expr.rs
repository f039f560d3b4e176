//! Expression trees over `x1..xn` and the text syntax that produces them.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' integer)?
//! base   := number | 'x' index | '(' expr ')' | 'ln' '(' expr ')'
//!         | 'exp' '(' expr ')' | '-' factor
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::{Taylor, MAX_DIM};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Zero-based variable index (`x1` is `Var(0)`).
    Var(usize),
    Const(f64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Ln(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn ln(self) -> Self {
        Expr::Ln(Box::new(self))
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Box::new(self))
    }

    pub fn powi(self, k: i32) -> Self {
        Expr::Pow(Box::new(self), k)
    }

    /// Sum of terms; the empty sum is `0`.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Self {
        terms.into_iter().reduce(|a, b| a + b).unwrap_or(Expr::Const(0.0))
    }

    /// One more than the largest variable index, or 0 for constants.
    pub fn min_dim(&self) -> usize {
        match self {
            Expr::Var(i) => i + 1,
            Expr::Const(_) => 0,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Ln(a) | Expr::Exp(a) => a.min_dim(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.min_dim().max(b.min_dim()),
        }
    }

    /// Evaluates the tree with Taylor-polynomial inputs.
    ///
    /// `ln` of a non-positive value, division by zero and non-finite results
    /// are reported as domain errors naming the offending subexpression.
    pub fn eval_taylor(&self, inputs: &[Taylor]) -> Result<Taylor> {
        let out = match self {
            Expr::Var(i) => inputs[*i].clone(),
            Expr::Const(c) => {
                let t = &inputs[0];
                Taylor::constant(t.basis(), t.order(), *c)
            }
            Expr::Neg(a) => a.eval_taylor(inputs)?.scale(-1.0),
            Expr::Add(a, b) => a.eval_taylor(inputs)?.add(&b.eval_taylor(inputs)?),
            Expr::Sub(a, b) => a.eval_taylor(inputs)?.sub(&b.eval_taylor(inputs)?),
            Expr::Mul(a, b) => a.eval_taylor(inputs)?.mul(&b.eval_taylor(inputs)?),
            Expr::Div(a, b) => {
                let den = b.eval_taylor(inputs)?;
                if den.value() == 0.0 {
                    return Err(self.domain("division by zero"));
                }
                a.eval_taylor(inputs)?.mul(&den.recip())
            }
            Expr::Pow(a, k) => {
                let base = a.eval_taylor(inputs)?;
                if *k < 0 && base.value() == 0.0 {
                    return Err(self.domain("negative power of zero"));
                }
                base.powi(*k)
            }
            Expr::Ln(a) => {
                let arg = a.eval_taylor(inputs)?;
                if !(arg.value() > 0.0) {
                    return Err(self.domain(&format!("argument evaluates to {} (must be positive)", arg.value())));
                }
                arg.ln()
            }
            Expr::Exp(a) => a.eval_taylor(inputs)?.exp(),
        };
        if !out.is_finite() {
            return Err(self.domain("non-finite result"));
        }
        Ok(out)
    }

    /// Plain `f64` evaluation.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let v = match self {
            Expr::Var(i) => x[*i],
            Expr::Const(c) => *c,
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let den = b.eval(x)?;
                if den == 0.0 {
                    return Err(self.domain("division by zero"));
                }
                a.eval(x)? / den
            }
            Expr::Pow(a, k) => {
                let base = a.eval(x)?;
                if *k < 0 && base == 0.0 {
                    return Err(self.domain("negative power of zero"));
                }
                base.powi(*k)
            }
            Expr::Ln(a) => {
                let arg = a.eval(x)?;
                if !(arg > 0.0) {
                    return Err(self.domain(&format!("argument evaluates to {arg} (must be positive)")));
                }
                arg.ln()
            }
            Expr::Exp(a) => a.eval(x)?.exp(),
        };
        if !v.is_finite() {
            return Err(self.domain("non-finite result"));
        }
        Ok(v)
    }

    fn domain(&self, reason: &str) -> Error {
        Error::Domain {
            expr: self.to_string(),
            reason: reason.to_string(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 => 3,
            _ => 5,
        }
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

impl_binop!(Add, add, Add);
impl_binop!(Sub, sub, Sub);
impl_binop!(Mul, mul, Mul);
impl_binop!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl fmt::Display for Expr {
    /// Prints in the parser's own syntax; the output re-parses to the same tree
    /// up to constant formatting.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Const(c) if *c < 0.0 => write!(f, "-{}", -c),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 3)
            }
            Expr::Add(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " + ")?;
                wrap(f, b, 2)
            }
            Expr::Sub(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " - ")?;
                wrap(f, b, 2)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "*")?;
                wrap(f, b, 3)
            }
            Expr::Div(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "/")?;
                wrap(f, b, 3)
            }
            Expr::Pow(a, k) => {
                wrap(f, a, 5)?;
                write!(f, "^{k}")
            }
            Expr::Ln(a) => write!(f, "ln({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

/// Parses an expression; returns it with the dimension inferred from the
/// largest variable index.
pub fn parse_expr(text: &str) -> Result<(Expr, usize)> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    let dim = expr.min_dim();
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if dim > MAX_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok((expr, dim))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => Err(self.syntax(format!("expected `{}`, found `{}`", c as char, got as char))),
            None => Err(self.syntax(format!("expected `{}`, found end of input", c as char))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = lhs + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = lhs * self.factor()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = lhs / self.factor()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.integer()?;
            return Ok(base.powi(k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if digits == self.pos {
            return Err(self.syntax("expected integer exponent"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("exponent `{text}` out of range"),
        })
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Expr::Const).map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match name {
            "x" => {
                let digits = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[digits..self.pos]).expect("ascii");
                match text.parse::<usize>() {
                    Ok(i) if (1..=MAX_DIM).contains(&i) => Ok(Expr::Var(i - 1)),
                    Ok(i) => Err(Error::VariableOutOfRange { index: i, dim: MAX_DIM }),
                    Err(_) => Err(Error::Syntax {
                        offset: digits,
                        message: "expected variable index after `x`".into(),
                    }),
                }
            }
            "ln" | "exp" => {
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(if name == "ln" { arg.ln() } else { arg.exp() })
            }
            _ => Err(Error::UnknownIdentifier {
                name: name.to_string(),
                offset: start,
            }),
        }
    }
}
