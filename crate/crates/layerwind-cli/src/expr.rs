//! Arithmetic expressions in `x`, `t` and `eps`.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr    = term (("+" | "-") term)*
//! term    = unary (("*" | "/") unary)*
//! unary   = "-" unary | power
//! power   = primary ("^" unary)?
//! primary = number | name | name "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! `^` binds tighter than unary minus and associates to the right, so
//! `-x^2 = -(x^2)` and `2^3^2 = 2^9`.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

/// Free variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    /// Space.
    X,
    /// Time.
    T,
    /// Perturbation parameter.
    Eps,
}

/// One-argument functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    /// `eˣ`.
    Exp,
    /// Natural logarithm.
    Ln,
    /// Hyperbolic tangent.
    Tanh,
    /// Hyperbolic secant.
    Sech,
    /// Absolute value.
    Abs,
    /// Square root.
    Sqrt,
}

/// Two-argument operators and functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    /// `+`.
    Add,
    /// `-`.
    Sub,
    /// `*`.
    Mul,
    /// `/`.
    Div,
    /// `^`.
    Pow,
    /// `min(a, b)`.
    Min,
    /// `max(a, b)`.
    Max,
}

/// Expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Finite literal.
    Num(f64),
    /// Variable reference.
    Var(Var),
    /// Negation.
    Neg(Box<Expr>),
    /// Function application.
    Call(Func, Box<Expr>),
    /// Binary operation.
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

/// Parse failure with a 1-based source location.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    /// Line of the offending token.
    pub line: usize,
    /// Column of the offending token, in characters.
    pub column: usize,
    /// Description.
    pub message: String,
}

impl Func {
    const ALL: [(Func, &'static str); 6] = [
        (Func::Exp, "exp"),
        (Func::Ln, "ln"),
        (Func::Tanh, "tanh"),
        (Func::Sech, "sech"),
        (Func::Abs, "abs"),
        (Func::Sqrt, "sqrt"),
    ];

    fn name(self) -> &'static str {
        Func::ALL
            .iter()
            .find(|(f, _)| *f == self)
            .map(|(_, n)| *n)
            .unwrap_or_default()
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Tanh => v.tanh(),
            Func::Sech => layerwind::composition::sech(v),
            Func::Abs => v.abs(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

impl Expr {
    /// Evaluates at `(x, t)` with perturbation parameter `eps`.
    pub fn eval(&self, x: f64, t: f64, eps: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::Eps) => eps,
            Expr::Neg(e) => -e.eval(x, t, eps),
            Expr::Call(f, e) => f.apply(e.eval(x, t, eps)),
            Expr::Binary(op, l, r) => {
                let (l, r) = (l.eval(x, t, eps), r.eval(x, t, eps));
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                    BinOp::Pow => l.powf(r),
                    BinOp::Min => l.min(r),
                    BinOp::Max => l.max(r),
                }
            }
        }
    }

    /// Whether `var` occurs in the tree.
    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses(var),
            Expr::Binary(_, l, r) => l.uses(var) || r.uses(var),
        }
    }
}

/// Fully parenthesized form that [`parse_expr`] reads back to an equal tree
/// up to the sign of literals.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => {
                write!(f, "(-{:?})", -v)
            }
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Var(Var::Eps) => f.write_str("eps"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(BinOp::Min, l, r) => write!(f, "min({l}, {r})"),
            Expr::Binary(BinOp::Max, l, r) => write!(f, "max({l}, {r})"),
            Expr::Binary(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    _ => "^",
                };
                write!(f, "({l} {sym} {r})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn location(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn error_at(src: &str, offset: usize, message: impl Into<String>) -> ParseError {
    let (line, column) = location(src, offset);
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| error_at(src, start, format!("malformed number '{text}'")))?;
            if !v.is_finite() {
                return Err(error_at(src, start, format!("number '{text}' overflows")));
            }
            toks.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            toks.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            toks.push((Tok::Op(c), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or(c);
            return Err(error_at(src, i, format!("unexpected character '{ch}'")));
        }
    }
    toks.push((Tok::End, src.len()));
    Ok(toks)
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(error_at(self.src, self.offset(), message))
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected '{op}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn args(&mut self, name: &str, at: usize) -> Result<Vec<Expr>, ParseError> {
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while *self.peek() == Tok::Op(',') {
            self.bump();
            args.push(self.expr()?);
        }
        if *self.peek() != Tok::Op(')') {
            return self.fail(format!("expected ',' or ')' in call to '{name}'"));
        }
        self.bump();
        let want = if matches!(name, "min" | "max") { 2 } else { 1 };
        if args.len() != want {
            return Err(error_at(
                self.src,
                at,
                format!("'{name}' takes {want} argument(s), got {}", args.len()),
            ));
        }
        Ok(args)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                if *self.peek() != Tok::Op(')') {
                    return Err(error_at(self.src, at, "unbalanced '('"));
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(name) => {
                let is_call = *self.peek() == Tok::Op('(');
                match name.as_str() {
                    "x" | "t" | "eps" | "pi" if is_call => Err(error_at(
                        self.src,
                        at,
                        format!("'{name}' is not a function"),
                    )),
                    "x" => Ok(Expr::Var(Var::X)),
                    "t" => Ok(Expr::Var(Var::T)),
                    "eps" => Ok(Expr::Var(Var::Eps)),
                    "pi" => Ok(Expr::Num(PI)),
                    "min" | "max" => {
                        let mut a = self.args(&name, at)?;
                        let r = a.pop().expect("two arguments");
                        let l = a.pop().expect("two arguments");
                        let op = if name == "min" {
                            BinOp::Min
                        } else {
                            BinOp::Max
                        };
                        Ok(Expr::Binary(op, Box::new(l), Box::new(r)))
                    }
                    _ => match Func::ALL.iter().find(|(_, n)| *n == name) {
                        Some(&(func, _)) => {
                            let mut a = self.args(&name, at)?;
                            Ok(Expr::Call(func, Box::new(a.pop().expect("one argument"))))
                        }
                        None => Err(error_at(
                            self.src,
                            at,
                            format!("unknown identifier '{name}'"),
                        )),
                    },
                }
            }
            Tok::Op(')') => Err(error_at(self.src, at, "unbalanced ')'")),
            Tok::Op(c) => Err(error_at(self.src, at, format!("unexpected '{c}'"))),
            Tok::End => Err(error_at(self.src, at, "unexpected end of expression")),
        }
    }
}

/// Parses `src` into an expression tree.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src,
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        Tok::Op(')') => p.fail("unbalanced ')'"),
        _ => p.fail("unexpected trailing input"),
    }
}
