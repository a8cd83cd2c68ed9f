//! A small arithmetic language for the coefficient fields α(x), V(x), K(x).
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?          right-associative, constant exponent
//! atom   := number | x<k> | func '(' expr ')' | '(' expr ')'
//! func   := exp | log | sqrt | sin | cos | tanh | abs
//! ```
//!
//! Gradients come from forward-mode dual numbers, so they are exact to
//! rounding.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Tanh,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Expression tree. Variables are zero-based (`x1` is `Var(0)`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("variable x{index} at byte {offset} exceeds dimension {dim}")]
    VariableOutOfRange {
        offset: usize,
        index: usize,
        dim: usize,
    },
    #[error("domain error in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: String },
}

impl ExprError {
    /// Byte offset of a parse error, if it has one.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ExprError::Syntax { offset, .. }
            | ExprError::UnknownIdentifier { offset, .. }
            | ExprError::VariableOutOfRange { offset, .. } => Some(*offset),
            ExprError::Domain { .. } => None,
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            offset,
            message: message.into(),
        })
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.syntax(self.pos, format!("expected `{}`", c as char))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.pos;
        let exponent = self.unary()?;
        match exponent.constant_value() {
            Some(e) if e.is_finite() => Ok(Expr::Pow(Box::new(base), e)),
            _ => self.syntax(at, "exponent must be a finite constant"),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let start = match self.peek() {
            None => return self.syntax(self.pos, "unexpected end of input"),
            Some(_) => self.pos,
        };
        let c = self.src[start];
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect(b')')?;
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            if let Some(func) = Func::from_name(name) {
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                return Ok(Expr::Call(func, Box::new(arg)));
            }
            if let Some(digits) = name.strip_prefix('x') {
                if let Ok(index) = digits.parse::<usize>() {
                    if index == 0 || index > self.dim {
                        return Err(ExprError::VariableOutOfRange {
                            offset: start,
                            index,
                            dim: self.dim,
                        });
                    }
                    return Ok(Expr::Var(index - 1));
                }
            }
            return Err(ExprError::UnknownIdentifier {
                offset: start,
                name: name.to_string(),
            });
        }
        self.syntax(start, format!("unexpected character `{}`", c as char))
    }

    fn number(&mut self, start: usize) -> Result<Expr, ExprError> {
        let src = self.src;
        let mut end = start;
        while end < src.len() && (src[end].is_ascii_digit() || src[end] == b'.') {
            end += 1;
        }
        if end < src.len() && (src[end] == b'e' || src[end] == b'E') {
            let mut k = end + 1;
            if k < src.len() && (src[k] == b'+' || src[k] == b'-') {
                k += 1;
            }
            if k < src.len() && src[k].is_ascii_digit() {
                while k < src.len() && src[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = std::str::from_utf8(&src[start..end]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) => {
                self.pos = end;
                Ok(Expr::Num(v))
            }
            Err(_) => self.syntax(start, format!("malformed number `{text}`")),
        }
    }
}

/// Parses `text` as an expression over variables `x1..=xn`.
pub fn parse(text: &str, n: usize) -> Result<Expr, ExprError> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        dim: n,
    };
    if parser.peek().is_none() {
        return Err(ExprError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let expr = parser.expr()?;
    if let Some(c) = parser.peek() {
        return Err(ExprError::Syntax {
            offset: parser.pos,
            message: format!("unexpected trailing `{}`", c as char),
        });
    }
    Ok(expr)
}

/// Value and gradient of an expression at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Set when a nonsmooth point (abs at 0, sqrt at 0, ...) was crossed;
    /// the gradient is then one element of the subdifferential.
    pub nonsmooth: bool,
}

#[derive(Clone, Debug)]
struct Dual {
    v: f64,
    d: Vec<f64>,
}

impl Dual {
    fn constant(v: f64, n: usize) -> Self {
        Dual { v, d: vec![0.0; n] }
    }

    /// Chain rule for a scalar function with value `v` and slope `slope`.
    fn map(self, v: f64, slope: f64) -> Self {
        Dual {
            v,
            d: self.d.into_iter().map(|g| slope * g).collect(),
        }
    }
}

impl Expr {
    /// Value of a variable-free subtree.
    pub fn constant_value(&self) -> Option<f64> {
        Some(match self {
            Expr::Num(v) => *v,
            Expr::Var(_) => return None,
            Expr::Neg(e) => -e.constant_value()?,
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.constant_value()?, r.constant_value()?);
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                }
            }
            Expr::Pow(b, e) => b.constant_value()?.powf(*e),
            Expr::Call(f, a) => {
                let a = a.constant_value()?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tanh => a.tanh(),
                    Func::Abs => a.abs(),
                }
            }
        })
    }

    /// Largest variable index used plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.arity(),
            Expr::Bin(_, l, r) => l.arity().max(r.arity()),
        }
    }

    /// Value and exact gradient at `z`.
    pub fn eval_with_gradient(&self, z: &[f64]) -> Result<Evaluation, ExprError> {
        if z.len() < self.arity() {
            return Err(ExprError::Domain {
                subexpr: self.to_string(),
                reason: format!(
                    "point has {} coordinates, expression needs {}",
                    z.len(),
                    self.arity()
                ),
            });
        }
        if let Some(bad) = z.iter().find(|v| !v.is_finite()) {
            return Err(ExprError::Domain {
                subexpr: self.to_string(),
                reason: format!("non-finite coordinate {bad}"),
            });
        }
        let mut nonsmooth = false;
        let dual = self.dual(z, &mut nonsmooth)?;
        Ok(Evaluation {
            value: dual.v,
            gradient: dual.d,
            nonsmooth,
        })
    }

    /// Value only.
    pub fn eval(&self, z: &[f64]) -> Result<f64, ExprError> {
        self.eval_with_gradient(z).map(|e| e.value)
    }

    fn domain(&self, reason: impl Into<String>) -> ExprError {
        ExprError::Domain {
            subexpr: self.to_string(),
            reason: reason.into(),
        }
    }

    fn dual(&self, z: &[f64], nonsmooth: &mut bool) -> Result<Dual, ExprError> {
        let n = z.len();
        Ok(match self {
            Expr::Num(v) => Dual::constant(*v, n),
            Expr::Var(i) => {
                let mut d = Dual::constant(z[*i], n);
                d.d[*i] = 1.0;
                d
            }
            Expr::Neg(e) => {
                let a = e.dual(z, nonsmooth)?;
                let v = -a.v;
                a.map(v, -1.0)
            }
            Expr::Bin(op, l, r) => {
                let a = l.dual(z, nonsmooth)?;
                let b = r.dual(z, nonsmooth)?;
                let combine = |fa: f64, fb: f64, v: f64| Dual {
                    v,
                    d: a.d.iter().zip(&b.d).map(|(x, y)| fa * x + fb * y).collect(),
                };
                match op {
                    BinOp::Add => combine(1.0, 1.0, a.v + b.v),
                    BinOp::Sub => combine(1.0, -1.0, a.v - b.v),
                    BinOp::Mul => combine(b.v, a.v, a.v * b.v),
                    BinOp::Div => {
                        if b.v == 0.0 {
                            return Err(self.domain("division by zero"));
                        }
                        combine(1.0 / b.v, -a.v / (b.v * b.v), a.v / b.v)
                    }
                }
            }
            Expr::Pow(base, e) => {
                let a = base.dual(z, nonsmooth)?;
                let e = *e;
                let integral = e.fract() == 0.0;
                if a.v < 0.0 && !integral {
                    return Err(self.domain("negative base with non-integer exponent"));
                }
                if a.v == 0.0 {
                    if e < 0.0 {
                        return Err(self.domain("division by zero (negative power of 0)"));
                    }
                    if e == 0.0 {
                        return Ok(Dual::constant(1.0, n));
                    }
                    if e < 1.0 {
                        *nonsmooth = true;
                        return Ok(a.map(0.0, 0.0));
                    }
                }
                let v = a.v.powf(e);
                let slope = if e == 0.0 { 0.0 } else { e * a.v.powf(e - 1.0) };
                a.map(v, slope)
            }
            Expr::Call(f, arg) => {
                let a = arg.dual(z, nonsmooth)?;
                let x = a.v;
                match f {
                    Func::Exp => {
                        let v = x.exp();
                        a.map(v, v)
                    }
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(self.domain(format!("log of nonpositive value {x}")));
                        }
                        a.map(x.ln(), 1.0 / x)
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(self.domain(format!("sqrt of negative value {x}")));
                        }
                        if x == 0.0 {
                            *nonsmooth = true;
                            a.map(0.0, 0.0)
                        } else {
                            let v = x.sqrt();
                            a.map(v, 0.5 / v)
                        }
                    }
                    Func::Sin => a.map(x.sin(), x.cos()),
                    Func::Cos => a.map(x.cos(), -x.sin()),
                    Func::Tanh => {
                        let t = x.tanh();
                        a.map(t, 1.0 - t * t)
                    }
                    Func::Abs => {
                        if x == 0.0 {
                            *nonsmooth = true;
                        }
                        a.map(x.abs(), x.signum() * f64::from(x != 0.0))
                    }
                }
            }
        })
    }
}

impl fmt::Display for Expr {
    /// Prints in a form that re-parses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                };
                write!(f, "({l} {sym} {r})")
            }
            Expr::Pow(b, e) => {
                if *e < 0.0 || e.is_sign_negative() {
                    write!(f, "({b}^(-{:?}))", -e)
                } else {
                    write!(f, "({b}^{e:?})")
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
