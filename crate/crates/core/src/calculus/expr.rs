//! Expression language for user-defined fields.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := NUMBER | 't' | 'q' '[' INT ']' | 'qdot' '[' INT ']'
//!         | IDENT '(' expr ')' | IDENT | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative, so `-x^2`
//! is `-(x^2)` and `a^b^c` is `a^(b^c)`. Function identifiers are `sin`,
//! `cos`, `exp` and `sqrt`; any other identifier names a numeric parameter.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::calculus::field::{EvalError, Evaluate};
use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        match s {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Expression AST.
#[derive(Clone, Debug, PartialEq)]
pub enum Expression {
    Num(f64),
    Time,
    Q(usize),
    Qdot(usize),
    Param(String),
    Neg(Box<Expression>),
    Binary(BinOp, Box<Expression>, Box<Expression>),
    Call(Func, Box<Expression>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical(char),
    Syntax(String),
    UnknownIdentifier(String),
    IndexOutOfRange { index: usize, dim: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Lexical(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UnknownIdentifier(id) => write!(f, "unknown identifier `{id}`"),
            ParseErrorKind::IndexOutOfRange { index, dim } => {
                write!(f, "index {index} out of range for dimension {dim}")
            }
        }
    }
}

/// Constraints checked while parsing.
#[derive(Clone, Debug, Default)]
pub struct ParseContext {
    /// Bound on `q[i]` / `qdot[i]` indices.
    pub dim: Option<usize>,
    /// Known parameter names; `None` accepts any identifier as a parameter.
    pub params: Option<Vec<String>>,
    /// Reject `q` and `qdot`; used for force curves that depend on `t` only.
    pub time_only: bool,
}

pub fn parse_expression(src: &str) -> Result<Expression, ParseError> {
    parse_with(src, &ParseContext::default())
}

pub fn parse_with(src: &str, ctx: &ParseContext) -> Result<Expression, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0, ctx };
    let e = p.expr()?;
    let tok = p.peek();
    if tok.kind != Tok::Eof {
        let msg = format!("unexpected {}", tok.kind.describe());
        return Err(p.err_at(tok, ParseErrorKind::Syntax(msg)));
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x, _) => format!("number {x}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            _ => None,
        };
        if let Some(kind) = single {
            out.push(Token { kind, line: l0, column: c0 });
            i += 1;
            col += 1;
            continue;
        }
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            let mut integral = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integral = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 =
                text.parse().map_err(|_| ParseError { kind: ParseErrorKind::Lexical(c), line: l0, column: c0 })?;
            col += i - start;
            out.push(Token { kind: Tok::Num(value, integral), line: l0, column: c0 });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { kind: Tok::Ident(chars[start..i].iter().collect()), line: l0, column: c0 });
            continue;
        }
        return Err(ParseError { kind: ParseErrorKind::Lexical(c), line: l0, column: c0 });
    }
    out.push(Token { kind: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    ctx: &'a ParseContext,
}

impl Parser<'_> {
    fn peek(&self) -> Token {
        self.tokens[self.pos].clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.peek();
        if t.kind != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, tok: Token, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, line: tok.line, column: tok.column }
    }

    fn expect(&mut self, want: Tok) -> Result<Token, ParseError> {
        let t = self.peek();
        if t.kind == want {
            Ok(self.bump())
        } else {
            Err(self.err_at(
                t.clone(),
                ParseErrorKind::Syntax(format!("expected {}, found {}", want.describe(), t.kind.describe())),
            ))
        }
    }

    fn expr(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().kind {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expression, ParseError> {
        if self.peek().kind == Tok::Minus {
            self.bump();
            return Ok(Expression::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression, ParseError> {
        let base = self.atom()?;
        if self.peek().kind == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expression::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn index(&mut self) -> Result<usize, ParseError> {
        self.expect(Tok::LBracket)?;
        let tok = self.bump();
        let idx = match tok.kind {
            Tok::Num(x, true) if x <= usize::MAX as f64 => x as usize,
            ref other => {
                return Err(self.err_at(
                    tok.clone(),
                    ParseErrorKind::Syntax(format!("expected integer index, found {}", other.describe())),
                ))
            }
        };
        if let Some(dim) = self.ctx.dim {
            if idx >= dim {
                return Err(self.err_at(tok, ParseErrorKind::IndexOutOfRange { index: idx, dim }));
            }
        }
        self.expect(Tok::RBracket)?;
        Ok(idx)
    }

    fn atom(&mut self) -> Result<Expression, ParseError> {
        let tok = self.bump();
        match tok.kind.clone() {
            Tok::Num(x, _) => Ok(Expression::Num(x)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let is_var = matches!(name.as_str(), "t" | "q" | "qdot");
                if is_var && self.ctx.time_only && name != "t" {
                    return Err(self.err_at(tok, ParseErrorKind::UnknownIdentifier(name)));
                }
                match name.as_str() {
                    "t" => Ok(Expression::Time),
                    "q" => Ok(Expression::Q(self.index()?)),
                    "qdot" => Ok(Expression::Qdot(self.index()?)),
                    _ if self.peek().kind == Tok::LParen => {
                        let f = Func::from_name(&name)
                            .ok_or_else(|| self.err_at(tok.clone(), ParseErrorKind::UnknownIdentifier(name)))?;
                        self.bump();
                        let arg = self.expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(Expression::Call(f, Box::new(arg)))
                    }
                    _ => {
                        if Func::from_name(&name).is_some() {
                            let next = self.peek();
                            return Err(self.err_at(
                                next.clone(),
                                ParseErrorKind::Syntax(format!(
                                    "expected `(` after `{name}`, found {}",
                                    next.kind.describe()
                                )),
                            ));
                        }
                        if let Some(params) = &self.ctx.params {
                            if !params.iter().any(|p| p == &name) {
                                return Err(self.err_at(tok, ParseErrorKind::UnknownIdentifier(name)));
                            }
                        }
                        Ok(Expression::Param(name))
                    }
                }
            }
            other => {
                Err(self
                    .err_at(tok, ParseErrorKind::Syntax(format!("expected expression, found {}", other.describe()))))
            }
        }
    }
}

fn precedence(e: &Expression) -> u8 {
    match e {
        Expression::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Expression::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Expression::Neg(_) => 3,
        Expression::Binary(BinOp::Pow, ..) => 4,
        Expression::Num(x) if *x < 0.0 => 0,
        _ => 5,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expression, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints with the minimal parentheses that reparse to the same tree.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Num(x) => write!(f, "{x}"),
            Expression::Time => write!(f, "t"),
            Expression::Q(i) => write!(f, "q[{i}]"),
            Expression::Qdot(i) => write!(f, "qdot[{i}]"),
            Expression::Param(p) => write!(f, "{p}"),
            Expression::Neg(e) => {
                write!(f, "-")?;
                write_wrapped(f, e, precedence(e) < 3)
            }
            Expression::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expression::Binary(op, l, r) => {
                let (level, sym) = match op {
                    BinOp::Add => (1, " + "),
                    BinOp::Sub => (1, " - "),
                    BinOp::Mul => (2, "*"),
                    BinOp::Div => (2, "/"),
                    BinOp::Pow => (4, "^"),
                };
                if *op == BinOp::Pow {
                    write_wrapped(f, l, precedence(l) < 5)?;
                    write!(f, "{sym}")?;
                    write_wrapped(f, r, precedence(r) < 3)
                } else {
                    write_wrapped(f, l, precedence(l) < level)?;
                    write!(f, "{sym}")?;
                    write_wrapped(f, r, precedence(r) <= level)
                }
            }
        }
    }
}

impl Expression {
    fn walk(&self, visit: &mut impl FnMut(&Expression)) {
        visit(self);
        match self {
            Expression::Neg(e) | Expression::Call(_, e) => e.walk(visit),
            Expression::Binary(_, l, r) => {
                l.walk(visit);
                r.walk(visit);
            }
            _ => {}
        }
    }

    pub fn uses_time(&self) -> bool {
        let mut hit = false;
        self.walk(&mut |e| hit |= matches!(e, Expression::Time));
        hit
    }

    pub fn uses_velocity(&self) -> bool {
        let mut hit = false;
        self.walk(&mut |e| hit |= matches!(e, Expression::Qdot(_)));
        hit
    }

    pub fn uses_position(&self) -> bool {
        let mut hit = false;
        self.walk(&mut |e| hit |= matches!(e, Expression::Q(_)));
        hit
    }

    /// One past the largest `q`/`qdot` index referenced.
    pub fn min_dim(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |e| {
            if let Expression::Q(i) | Expression::Qdot(i) = e {
                n = n.max(i + 1);
            }
        });
        n
    }

    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expression::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    fn is_constant(&self) -> bool {
        !(self.uses_time() || self.uses_position() || self.uses_velocity())
    }

    /// Evaluates with parameters looked up in `params`.
    pub fn eval<T: Real, S: Scalar<T>>(
        &self,
        q: &[S],
        qdot: &[S],
        t: S,
        params: &HashMap<String, T>,
    ) -> Result<S, EvalError> {
        let v = match self {
            Expression::Num(x) => S::constant(T::lit(*x)),
            Expression::Time => t,
            Expression::Q(i) => q[*i],
            Expression::Qdot(i) => qdot[*i],
            Expression::Param(p) => S::constant(*params.get(p).ok_or(EvalError::NonFinite)?),
            Expression::Neg(e) => -e.eval(q, qdot, t, params)?,
            Expression::Call(func, e) => {
                let x = e.eval(q, qdot, t, params)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => x.sqrt(),
                }
            }
            Expression::Binary(op, l, r) => {
                let a = l.eval(q, qdot, t, params)?;
                if *op == BinOp::Pow && r.is_constant() {
                    // constant subtrees never index q or qdot
                    let e: T = r.eval::<T, T>(&[], &[], T::zero(), params)?;
                    return check(pow_const(a, e));
                }
                let b = r.eval(q, qdot, t, params)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.re() == T::zero() {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => a.pow(b),
                }
            }
        };
        check(v)
    }
}

fn check<T: Real, S: Scalar<T>>(v: S) -> Result<S, EvalError> {
    if v.re().is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn pow_const<T: Real, S: Scalar<T>>(a: S, e: T) -> S {
    let r = e.round();
    if r == e && r.abs() <= T::lit(64.0) {
        let n = r.to_i32().expect("small integer exponent");
        if n >= 0 {
            a.powi(n)
        } else {
            S::constant(T::one()) / a.powi(-n)
        }
    } else {
        a.powf(e)
    }
}

/// A scalar field defined by an expression with bound parameters.
#[derive(Clone, Debug)]
pub struct ExpressionField<T> {
    expr: Expression,
    dim: usize,
    params: HashMap<String, T>,
}

impl<T: Real> ExpressionField<T> {
    /// Validates indices against `dim` and checks every parameter is bound.
    pub fn new(expr: Expression, dim: usize, params: HashMap<String, T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if expr.min_dim() > dim {
            return Err(Error::InvalidArgument(format!(
                "expression references index {} but dimension is {dim}",
                expr.min_dim() - 1
            )));
        }
        if let Some(missing) = expr.params().into_iter().find(|p| !params.contains_key(p)) {
            return Err(Error::InvalidArgument(format!("unbound parameter `{missing}`")));
        }
        Ok(ExpressionField { expr, dim, params })
    }

    /// Parses `src` with position-carrying errors for out-of-range indices
    /// and unknown parameter names.
    pub fn parse(src: &str, dim: usize, params: HashMap<String, T>) -> Result<Self> {
        let ctx = ParseContext { dim: Some(dim), params: Some(params.keys().cloned().collect()), time_only: false };
        let expr = parse_with(src, &ctx)?;
        Self::new(expr, dim, params)
    }

    pub fn expression(&self) -> &Expression {
        &self.expr
    }
}

impl<T: Real> Evaluate<T> for ExpressionField<T> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn uses_velocity(&self) -> bool {
        self.expr.uses_velocity()
    }
    fn uses_time(&self) -> bool {
        self.expr.uses_time()
    }
    fn eval<S: Scalar<T>>(&self, q: &[S], qdot: &[S], t: S) -> Result<S, EvalError> {
        self.expr.eval(q, qdot, t, &self.params)
    }
}
