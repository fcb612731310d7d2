//! Scalar expressions over space variables and jet variables.
//!
//! The textual form follows this grammar, with `^` right-associative and
//! unary minus binding tighter than `^`:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-' unary | atom
//! atom   := number | ident | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Identifiers are `x<digits>` for space coordinates, `u<digits>` for
//! solution components and `D[<comma-separated digits>]u<digits>` for
//! derivative (jet) variables; `u3` is shorthand for the zero-order jet of
//! component 3. Functions are `sin`, `cos`, `exp`, `log`, `sqrt`, `tanh`.
//! Numbers are unsigned decimals with an optional exponent.
//!
//! Printing produces a canonical form that parses back to a structurally
//! identical tree.

use std::fmt;
use std::sync::Arc;

use crate::poly::monomials;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivByZero,
    #[error("log of a non-positive value")]
    LogDomain,
    #[error("square root of a negative value")]
    SqrtDomain,
    #[error("negative base raised to a fractional power")]
    PowDomain,
    #[error("jet variable used where no jet values are bound")]
    JetUnavailable,
    #[error("jet variable index out of range")]
    JetIndex,
}

/// Enumeration of the derivative variables of a first-order-to-m-th-order
/// system: for each of `comps` solution components, one slot per monomial
/// multi-index of total order up to `order`, in graded-lex order. Component
/// blocks are consecutive, so the flat jet vector has length
/// `comps * binomial(dim + order, order)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSpec {
    dim: usize,
    comps: usize,
    order: u32,
    multis: Vec<Vec<u32>>,
}

impl JetSpec {
    pub fn new(dim: usize, comps: usize, order: u32) -> JetSpec {
        assert!(dim >= 1 && comps >= 1);
        JetSpec {
            dim,
            comps,
            order,
            multis: monomials(dim, order),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn comps(&self) -> usize {
        self.comps
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Jet slots per component.
    pub fn block_len(&self) -> usize {
        self.multis.len()
    }

    /// Total jet vector length.
    pub fn total_len(&self) -> usize {
        self.comps * self.multis.len()
    }

    pub fn multis(&self) -> &[Vec<u32>] {
        &self.multis
    }

    pub fn index(&self, comp: usize, alpha: &[u32]) -> Option<usize> {
        if comp >= self.comps || alpha.len() != self.dim {
            return None;
        }
        self.multis
            .iter()
            .position(|m| m == alpha)
            .map(|pos| comp * self.multis.len() + pos)
    }

    /// Inverse of `index`.
    pub fn entry(&self, idx: usize) -> (usize, &[u32]) {
        let comp = idx / self.multis.len();
        (comp, &self.multis[idx % self.multis.len()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
}

impl Func {
    fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Space coordinate, zero-based; prints as `x{axis+1}`.
    Var(usize),
    /// Jet variable `D[alpha] u{comp+1}`.
    Jet { comp: usize, alpha: Vec<u32> },
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Validation context for parsing: which variables exist.
#[derive(Debug, Clone)]
pub struct ExprContext {
    pub spec: JetSpec,
    /// Right-hand sides are functions of space only; jets are rejected.
    pub allow_jets: bool,
}

impl ExprContext {
    pub fn operator(spec: &JetSpec) -> ExprContext {
        ExprContext {
            spec: spec.clone(),
            allow_jets: true,
        }
    }

    pub fn space_only(spec: &JetSpec) -> ExprContext {
        ExprContext {
            spec: spec.clone(),
            allow_jets: false,
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos >= self.src.len() {
                out.push((Tok::End, self.pos));
                return Ok(out);
            }
            let start = self.pos;
            let c = self.src[self.pos];
            let tok = match c {
                b'+' => {
                    self.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    self.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    self.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    self.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    self.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    self.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    self.pos += 1;
                    Tok::RParen
                }
                b'[' => {
                    self.pos += 1;
                    Tok::LBracket
                }
                b']' => {
                    self.pos += 1;
                    Tok::RBracket
                }
                b',' => {
                    self.pos += 1;
                    Tok::Comma
                }
                b'0'..=b'9' => self.lex_number(start)?,
                b'a'..=b'z' | b'A'..=b'Z' => self.lex_name(start),
                other => {
                    return Err(ParseError {
                        offset: start,
                        message: format!("unexpected character {:?}", other as char),
                    })
                }
            };
            out.push((tok, start));
        }
    }

    fn lex_number(&mut self, start: usize) -> Result<Tok, ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        // Exponent only counts when followed by digits (with optional sign);
        // otherwise the letter starts the next token.
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mut probe = self.pos + 1;
            if probe < self.src.len() && (self.src[probe] == b'+' || self.src[probe] == b'-') {
                probe += 1;
            }
            if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                self.pos = probe;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<f64>().map(Tok::Num).map_err(|_| ParseError {
            offset: start,
            message: format!("malformed number {text:?}"),
        })
    }

    fn lex_name(&mut self, start: usize) -> Tok {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        Tok::Name(text.to_string())
    }
}

// ---------------------------------------------------------------------------
// Parser

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    ctx: &'a ExprContext,
}

pub fn parse(text: &str, ctx: &ExprContext) -> Result<Expr, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, at: 0, ctx };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(p.error("unexpected trailing input")),
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, message: &str) -> ParseError {
        ParseError {
            offset: self.offset(),
            message: message.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == &tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if self.peek() == &Tok::Caret {
            self.bump();
            let exp = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == &Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "expected ')'")?;
                Ok(inner)
            }
            Tok::Name(name) => {
                let at = self.offset();
                self.bump();
                self.named_atom(&name, at)
            }
            _ => Err(self.error("expected expression")),
        }
    }

    fn named_atom(&mut self, name: &str, at: usize) -> Result<Expr, ParseError> {
        if let Some(func) = Func::from_name(name) {
            self.expect(Tok::LParen, "expected '(' after function name")?;
            let arg = self.expr()?;
            self.expect(Tok::RParen, "expected ')'")?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if name == "D" {
            self.expect(Tok::LBracket, "expected '[' after D")?;
            let mut alpha = Vec::new();
            loop {
                let entry = match self.peek() {
                    Tok::Num(v) => *v,
                    _ => return Err(self.error("expected derivative order")),
                };
                if entry.fract() != 0.0 || !(0.0..=64.0).contains(&entry) {
                    return Err(self.error("derivative orders must be small non-negative integers"));
                }
                self.bump();
                alpha.push(entry as u32);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RBracket => break,
                    _ => return Err(self.error("expected ',' or ']'")),
                }
            }
            self.bump(); // ']'
            let comp_at = self.offset();
            let comp_name = match self.bump() {
                Tok::Name(n) => n,
                _ => {
                    return Err(ParseError {
                        offset: comp_at,
                        message: "expected component name u<digits> after ']'".to_string(),
                    })
                }
            };
            let comp = parse_indexed(&comp_name, 'u').ok_or(ParseError {
                offset: comp_at,
                message: format!("expected component name u<digits>, got {comp_name:?}"),
            })?;
            return self.jet_atom(comp, alpha, at);
        }
        if let Some(idx) = parse_indexed(name, 'x') {
            if idx == 0 || idx > self.ctx.spec.dim() {
                return Err(ParseError {
                    offset: at,
                    message: format!(
                        "space variable x{idx} out of range for dimension {}",
                        self.ctx.spec.dim()
                    ),
                });
            }
            return Ok(Expr::Var(idx - 1));
        }
        if let Some(idx) = parse_indexed(name, 'u') {
            let alpha = vec![0; self.ctx.spec.dim()];
            return self.jet_atom(idx, alpha, at);
        }
        Err(ParseError {
            offset: at,
            message: format!("unknown identifier {name:?}"),
        })
    }

    fn jet_atom(&mut self, comp_1based: usize, alpha: Vec<u32>, at: usize) -> Result<Expr, ParseError> {
        if !self.ctx.allow_jets {
            return Err(ParseError {
                offset: at,
                message: "solution variables are not allowed in this expression".to_string(),
            });
        }
        let spec = &self.ctx.spec;
        if comp_1based == 0 || comp_1based > spec.comps() {
            return Err(ParseError {
                offset: at,
                message: format!(
                    "component u{comp_1based} out of range for a {}-component system",
                    spec.comps()
                ),
            });
        }
        if alpha.len() != spec.dim() {
            return Err(ParseError {
                offset: at,
                message: format!(
                    "derivative multi-index has {} entries, expected {}",
                    alpha.len(),
                    spec.dim()
                ),
            });
        }
        let total: u32 = alpha.iter().sum();
        if total > spec.order() {
            return Err(ParseError {
                offset: at,
                message: format!(
                    "derivative order {total} exceeds the operator order {}",
                    spec.order()
                ),
            });
        }
        Ok(Expr::Jet {
            comp: comp_1based - 1,
            alpha,
        })
    }
}

/// `x12` -> 12 for prefix 'x'; None when the shape does not match.
fn parse_indexed(name: &str, prefix: char) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

// ---------------------------------------------------------------------------
// Printing

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Bin(BinOp::Pow, ..) => 3,
        Expr::Neg(_) => 4,
        _ => 5,
    }
}

fn fmt_child(f: &mut fmt::Formatter<'_>, child: &Expr, min_prec: u8) -> fmt::Result {
    if prec(child) < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(axis) => write!(f, "x{}", axis + 1),
            Expr::Jet { comp, alpha } => {
                if alpha.iter().all(|&a| a == 0) {
                    write!(f, "u{}", comp + 1)
                } else {
                    write!(f, "D[")?;
                    for (i, a) in alpha.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, "]u{}", comp + 1)
                }
            }
            Expr::Neg(inner) => {
                write!(f, "-")?;
                fmt_child(f, inner, 4)
            }
            Expr::Bin(op, lhs, rhs) => match op {
                BinOp::Add => {
                    fmt_child(f, lhs, 1)?;
                    write!(f, " + ")?;
                    fmt_child(f, rhs, 2)
                }
                BinOp::Sub => {
                    fmt_child(f, lhs, 1)?;
                    write!(f, " - ")?;
                    fmt_child(f, rhs, 2)
                }
                BinOp::Mul => {
                    fmt_child(f, lhs, 2)?;
                    write!(f, "*")?;
                    fmt_child(f, rhs, 3)
                }
                BinOp::Div => {
                    fmt_child(f, lhs, 2)?;
                    write!(f, "/")?;
                    fmt_child(f, rhs, 3)
                }
                BinOp::Pow => {
                    fmt_child(f, lhs, 4)?;
                    write!(f, "^")?;
                    fmt_child(f, rhs, 3)
                }
            },
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation

impl Expr {
    /// Evaluate at a space point, optionally binding jet variables to the
    /// entries of a flat jet vector laid out by `spec`.
    pub fn eval(&self, x: &[f64], jets: Option<(&JetSpec, &[f64])>) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(axis) => Ok(x[*axis]),
            Expr::Jet { comp, alpha } => {
                let (spec, vals) = jets.ok_or(EvalError::JetUnavailable)?;
                let idx = spec.index(*comp, alpha).ok_or(EvalError::JetIndex)?;
                vals.get(idx).copied().ok_or(EvalError::JetIndex)
            }
            Expr::Neg(inner) => Ok(-inner.eval(x, jets)?),
            Expr::Bin(op, lhs, rhs) => {
                let a = lhs.eval(x, jets)?;
                let b = rhs.eval(x, jets)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(EvalError::DivByZero)
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinOp::Pow => {
                        if b.fract() == 0.0 && b.abs() <= 512.0 {
                            if a == 0.0 && b < 0.0 {
                                return Err(EvalError::DivByZero);
                            }
                            Ok(a.powi(b as i32))
                        } else if a < 0.0 {
                            Err(EvalError::PowDomain)
                        } else if a == 0.0 && b < 0.0 {
                            Err(EvalError::DivByZero)
                        } else {
                            Ok(a.powf(b))
                        }
                    }
                }
            }
            Expr::Call(func, arg) => {
                let v = arg.eval(x, jets)?;
                match func {
                    Func::Sin => Ok(v.sin()),
                    Func::Cos => Ok(v.cos()),
                    Func::Exp => Ok(v.exp()),
                    Func::Log => {
                        if v <= 0.0 {
                            Err(EvalError::LogDomain)
                        } else {
                            Ok(v.ln())
                        }
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            Err(EvalError::SqrtDomain)
                        } else {
                            Ok(v.sqrt())
                        }
                    }
                    Func::Tanh => Ok(v.tanh()),
                }
            }
        }
    }

    pub fn uses_jets(&self) -> bool {
        match self {
            Expr::Jet { .. } => true,
            Expr::Num(_) | Expr::Var(_) => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses_jets(),
            Expr::Bin(_, a, b) => a.uses_jets() || b.uses_jets(),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }
}

// Smart constructors keep derivative trees small.
fn num(v: f64) -> Expr {
    if v < 0.0 {
        Expr::Neg(Box::new(Expr::Num(-v)))
    } else {
        Expr::Num(v)
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        b
    } else if b.is_zero() {
        a
    } else {
        Expr::Bin(BinOp::Add, Box::new(a), Box::new(b))
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if b.is_zero() {
        a
    } else if a.is_zero() {
        neg(b)
    } else {
        Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b))
    }
}

fn neg(a: Expr) -> Expr {
    if a.is_zero() {
        a
    } else {
        Expr::Neg(Box::new(a))
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        Expr::Num(0.0)
    } else if a.is_one() {
        b
    } else if b.is_one() {
        a
    } else {
        Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b))
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        a
    } else if b.is_one() {
        a
    } else {
        Expr::Bin(BinOp::Div, Box::new(a), Box::new(b))
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    if b.is_one() {
        a
    } else if b.is_zero() {
        Expr::Num(1.0)
    } else {
        Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b))
    }
}

impl Expr {
    /// Symbolic partial derivative with respect to the jet variable at flat
    /// index `target` of `spec`. Space variables are treated as constants:
    /// this is the derivative used when solving for pointwise jet values.
    pub fn diff_jet(&self, spec: &JetSpec, target: usize) -> Expr {
        match self {
            Expr::Num(_) | Expr::Var(_) => Expr::Num(0.0),
            Expr::Jet { comp, alpha } => {
                if spec.index(*comp, alpha) == Some(target) {
                    Expr::Num(1.0)
                } else {
                    Expr::Num(0.0)
                }
            }
            Expr::Neg(inner) => neg(inner.diff_jet(spec, target)),
            Expr::Bin(op, lhs, rhs) => {
                let da = lhs.diff_jet(spec, target);
                let db = rhs.diff_jet(spec, target);
                let a = (**lhs).clone();
                let b = (**rhs).clone();
                match op {
                    BinOp::Add => add(da, db),
                    BinOp::Sub => sub(da, db),
                    BinOp::Mul => add(mul(da, b.clone()), mul(a, db)),
                    BinOp::Div => {
                        if db.is_zero() {
                            div(da, b)
                        } else {
                            div(
                                sub(mul(da, b.clone()), mul(a, db)),
                                pow(b, Expr::Num(2.0)),
                            )
                        }
                    }
                    BinOp::Pow => {
                        if db.is_zero() {
                            // constant exponent: b * a^(b-1) * a'
                            let bm1 = match &b {
                                Expr::Num(v) => num(v - 1.0),
                                other => sub(other.clone(), Expr::Num(1.0)),
                            };
                            mul(mul(b, pow(a, bm1)), da)
                        } else {
                            // a^b * (b' log a + b a'/a)
                            mul(
                                pow(a.clone(), b.clone()),
                                add(
                                    mul(db, Expr::Call(Func::Log, Box::new(a.clone()))),
                                    div(mul(b, da), a),
                                ),
                            )
                        }
                    }
                }
            }
            Expr::Call(func, arg) => {
                let da = arg.diff_jet(spec, target);
                if da.is_zero() {
                    return Expr::Num(0.0);
                }
                let a = (**arg).clone();
                let outer = match func {
                    Func::Sin => Expr::Call(Func::Cos, Box::new(a)),
                    Func::Cos => neg(Expr::Call(Func::Sin, Box::new(a))),
                    Func::Exp => Expr::Call(Func::Exp, Box::new(a)),
                    Func::Log => div(Expr::Num(1.0), a),
                    Func::Sqrt => div(
                        Expr::Num(1.0),
                        mul(Expr::Num(2.0), Expr::Call(Func::Sqrt, Box::new(a))),
                    ),
                    Func::Tanh => sub(
                        Expr::Num(1.0),
                        pow(Expr::Call(Func::Tanh, Box::new(a)), Expr::Num(2.0)),
                    ),
                };
                mul(outer, da)
            }
        }
    }
}

/// Shared handle used wherever expressions are stored inside functions.
pub type ExprRef = Arc<Expr>;
