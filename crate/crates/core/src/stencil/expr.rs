//! Residual expressions over `um1`, `u0`, `up1`.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' '-'? integer)?
//! base   := number | um1 | u0 | up1 | '(' expr ')' | func '(' expr ')'
//! func   := sin | cos | exp
//! ```
//!
//! Variables are resolved to argument slots at parse time: for arity 3 the
//! slots are `(um1, u0, up1)`, for arity 2 they are `(u0, up1)`.

use std::fmt;

use super::interval::Interval;
use super::StencilError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Argument slot.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

use Expr::*;

impl Expr {
    pub fn eval(&self, args: &[f64]) -> f64 {
        match self {
            Num(v) => *v,
            Var(i) => args[*i],
            Neg(a) => -a.eval(args),
            Add(a, b) => a.eval(args) + b.eval(args),
            Sub(a, b) => a.eval(args) - b.eval(args),
            Mul(a, b) => a.eval(args) * b.eval(args),
            Div(a, b) => a.eval(args) / b.eval(args),
            Pow(a, n) => a.eval(args).powi(*n),
            Call(f, a) => {
                let x = a.eval(args);
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                }
            }
        }
    }

    /// Encloses the range of the expression over a box of arguments.
    pub fn eval_interval(&self, args: &[Interval]) -> Interval {
        match self {
            Num(v) => Interval::point(*v),
            Var(i) => args[*i],
            Neg(a) => -a.eval_interval(args),
            Add(a, b) => a.eval_interval(args) + b.eval_interval(args),
            Sub(a, b) => a.eval_interval(args) - b.eval_interval(args),
            Mul(a, b) => a.eval_interval(args) * b.eval_interval(args),
            Div(a, b) => a.eval_interval(args) / b.eval_interval(args),
            Pow(a, n) => a.eval_interval(args).powi(*n),
            Call(f, a) => {
                let x = a.eval_interval(args);
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                }
            }
        }
    }

    pub fn references(&self, slot: usize) -> bool {
        match self {
            Num(_) => false,
            Var(i) => *i == slot,
            Neg(a) | Pow(a, _) | Call(_, a) => a.references(slot),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                a.references(slot) || b.references(slot)
            }
        }
    }

    /// Symbolic partial derivative with respect to argument `slot`.
    pub fn derivative(&self, slot: usize) -> Expr {
        match self {
            Num(_) => Num(0.0),
            Var(i) => Num(if *i == slot { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.derivative(slot)),
            Add(a, b) => add(a.derivative(slot), b.derivative(slot)),
            Sub(a, b) => sub(a.derivative(slot), b.derivative(slot)),
            Mul(a, b) => add(
                mul(a.derivative(slot), (**b).clone()),
                mul((**a).clone(), b.derivative(slot)),
            ),
            Div(a, b) => sub(
                div(a.derivative(slot), (**b).clone()),
                div(
                    mul((**a).clone(), b.derivative(slot)),
                    pow((**b).clone(), 2),
                ),
            ),
            Pow(a, n) => mul(
                mul(Num(f64::from(*n)), pow((**a).clone(), n - 1)),
                a.derivative(slot),
            ),
            Call(f, a) => {
                let outer = match f {
                    Func::Sin => Call(Func::Cos, a.clone()),
                    Func::Cos => neg(Call(Func::Sin, a.clone())),
                    Func::Exp => Call(Func::Exp, a.clone()),
                };
                mul(outer, a.derivative(slot))
            }
        }
    }
}

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Num(x) if *x == v)
}

fn neg(a: Expr) -> Expr {
    match a {
        Num(x) => Num(-x),
        Neg(inner) => *inner,
        a => Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Num(x), Num(y)) => Num(x + y),
        (a, b) if is_num(&a, 0.0) => b,
        (a, b) if is_num(&b, 0.0) => a,
        (a, b) => Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Num(x), Num(y)) => Num(x - y),
        (a, b) if is_num(&b, 0.0) => a,
        (a, b) if is_num(&a, 0.0) => neg(b),
        (a, b) => Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Num(x), Num(y)) => Num(x * y),
        (a, _) if is_num(&a, 0.0) => Num(0.0),
        (_, b) if is_num(&b, 0.0) => Num(0.0),
        (a, b) if is_num(&a, 1.0) => b,
        (a, b) if is_num(&b, 1.0) => a,
        (a, b) => Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Num(x), Num(y)) if y != 0.0 => Num(x / y),
        (a, _) if is_num(&a, 0.0) => Num(0.0),
        (a, b) if is_num(&b, 1.0) => a,
        (a, b) => Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, n: i32) -> Expr {
    match (a, n) {
        (_, 0) => Num(1.0),
        (a, 1) => a,
        (Num(x), n) => Num(x.powi(n)),
        (a, n) => Pow(Box::new(a), n),
    }
}

/// Renders an expression back to grammar text (fully parenthesized binary ops).
pub struct Display<'a> {
    expr: &'a Expr,
    names: &'a [&'a str],
}

impl<'a> fmt::Display for Display<'a> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |e: &'a Expr| Display {
            expr: e,
            names: self.names,
        };
        match self.expr {
            Num(v) => write!(f, "{v}"),
            Var(i) => f.write_str(self.names[*i]),
            Neg(a) => write!(f, "-({})", sub(a)),
            Add(a, b) => write!(f, "({} + {})", sub(a), sub(b)),
            Sub(a, b) => write!(f, "({} - {})", sub(a), sub(b)),
            Mul(a, b) => write!(f, "({} * {})", sub(a), sub(b)),
            Div(a, b) => write!(f, "({} / {})", sub(a), sub(b)),
            Pow(a, n) => write!(f, "({})^{n}", sub(a)),
            Call(func, a) => write!(f, "{}({})", func.name(), sub(a)),
        }
    }
}

pub(crate) fn slot_names(arity: usize) -> &'static [&'static str] {
    if arity == 2 {
        &["u0", "up1"]
    } else {
        &["um1", "u0", "up1"]
    }
}

impl Expr {
    pub fn display(&self, arity: usize) -> Display<'_> {
        Display {
            expr: self,
            names: slot_names(arity),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, StencilError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
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
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v = text.parse::<f64>().map_err(|_| StencilError::Syntax {
                pos: start,
                msg: format!("malformed number '{text}'"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(StencilError::Syntax {
                        pos: i,
                        msg: format!("unexpected character '{c}'"),
                    })
                }
            };
            out.push((tok, i));
            i += 1;
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    arity: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, StencilError> {
        Err(StencilError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, StencilError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, StencilError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, StencilError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Op('-') {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= f64::from(i32::MAX) => {
                self.bump();
                let n = v as i32;
                Ok(Pow(Box::new(base), if negative { -n } else { n }))
            }
            _ => self.syntax("exponent must be an integer literal"),
        }
    }

    fn base(&mut self) -> Result<Expr, StencilError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    _ => None,
                };
                if let Some(func) = func {
                    if *self.peek() != Tok::LParen {
                        return self.syntax(format!("expected '(' after '{name}'"));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Call(func, Box::new(arg)));
                }
                match (name.as_str(), self.arity) {
                    ("um1", 3) => Ok(Var(0)),
                    ("u0", 3) => Ok(Var(1)),
                    ("up1", 3) => Ok(Var(2)),
                    ("u0", 2) => Ok(Var(0)),
                    ("up1", 2) => Ok(Var(1)),
                    ("um1", 2) => Err(StencilError::Um1InTwoPoint { pos }),
                    _ => Err(StencilError::UnknownIdentifier { name, pos }),
                }
            }
            Tok::End => Err(StencilError::Syntax {
                pos,
                msg: "unexpected end of expression".into(),
            }),
            t => Err(StencilError::Syntax {
                pos,
                msg: format!("unexpected token {t:?}"),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), StencilError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            self.syntax("expected ')'")
        }
    }
}

/// Parses `src` into an expression over `arity` argument slots.
pub fn parse(src: &str, arity: usize) -> Result<Expr, StencilError> {
    if arity != 2 && arity != 3 {
        return Err(StencilError::BadArity(arity));
    }
    let toks = tokenize(src)?;
    let mut p = Parser { toks, at: 0, arity };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.syntax("trailing input");
    }
    Ok(e)
}
