//! Objective expressions over `x1..xn`.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?            right associative
//! atom    := number | const | var | call | '(' expr ')'
//! call    := ident '(' (expr (',' expr)*)? ')'
//! ```
//!
//! Gradients are derived symbolically when every node is smooth and every
//! exponent is free of variables.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{Flags, ScalarFunction};
use crate::space::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownIdentifier,
    Arity,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UnknownIdentifier => "unknown identifier",
            ParseErrorKind::Arity => "arity mismatch",
        })
    }
}

/// A parse failure at 1-based column `column`.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{kind} at column {column}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub column: usize,
    pub message: String,
}

fn err<T>(kind: ParseErrorKind, column: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        kind,
        column,
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fun {
    Abs,
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Cosh,
    Sinh,
    Max,
    Min,
    Norm1,
    Norm2,
    NormInf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ind {
    Ball1,
    Ball2,
    BallInf,
    Halfspace,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Fun, Vec<Node>),
    Indicator(Ind, Vec<Node>),
}

fn ind_value(inside: bool) -> f64 {
    if inside {
        0.0
    } else {
        f64::INFINITY
    }
}

impl Node {
    fn eval(&self, x: &Vector) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::Var(i) => x[*i],
            Node::Neg(a) => -a.eval(x),
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Node::Call(f, args) => {
                let mut vals = args.iter().map(|a| a.eval(x));
                match f {
                    Fun::Abs => vals.next().unwrap().abs(),
                    Fun::Exp => vals.next().unwrap().exp(),
                    Fun::Log => vals.next().unwrap().ln(),
                    Fun::Sqrt => vals.next().unwrap().sqrt(),
                    Fun::Sin => vals.next().unwrap().sin(),
                    Fun::Cos => vals.next().unwrap().cos(),
                    Fun::Cosh => vals.next().unwrap().cosh(),
                    Fun::Sinh => vals.next().unwrap().sinh(),
                    Fun::Max => vals.fold(f64::NEG_INFINITY, nan_max),
                    Fun::Min => vals.fold(f64::INFINITY, nan_min),
                    Fun::Norm1 => vals.map(f64::abs).sum(),
                    Fun::Norm2 => vals.map(|v| v * v).sum::<f64>().sqrt(),
                    Fun::NormInf => vals.map(f64::abs).fold(0.0, nan_max),
                }
            }
            Node::Indicator(kind, args) => {
                let vals: Vec<f64> = args.iter().map(|a| a.eval(x)).collect();
                match kind {
                    Ind::Ball1 => ind_value(x.lp_norm(1) <= vals[0]),
                    Ind::Ball2 => ind_value(x.norm() <= vals[0]),
                    Ind::BallInf => ind_value(x.amax() <= vals[0]),
                    Ind::Halfspace => {
                        let n = vals.len() - 1;
                        let s: f64 = (0..n).map(|i| vals[i] * x[i]).sum();
                        ind_value(s <= vals[n])
                    }
                }
            }
        }
    }

    fn depends_on_x(&self) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(_) => true,
            Node::Neg(a) => a.depends_on_x(),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => a.depends_on_x() || b.depends_on_x(),
            Node::Call(_, args) => args.iter().any(Node::depends_on_x),
            Node::Indicator(..) => true,
        }
    }

    /// Partial derivative in `x_{i+1}`, or `None` at a non-smooth node.
    fn diff(&self, i: usize) -> Option<Node> {
        use Node::*;
        let b = Box::new;
        Some(match self {
            Num(_) => Num(0.0),
            Var(j) => Num(if *j == i { 1.0 } else { 0.0 }),
            Neg(a) => Neg(b(a.diff(i)?)),
            Add(p, q) => Add(b(p.diff(i)?), b(q.diff(i)?)),
            Sub(p, q) => Sub(b(p.diff(i)?), b(q.diff(i)?)),
            Mul(p, q) => Add(
                b(Mul(b(p.diff(i)?), q.clone())),
                b(Mul(p.clone(), b(q.diff(i)?))),
            ),
            Div(p, q) => Div(
                b(Sub(
                    b(Mul(b(p.diff(i)?), q.clone())),
                    b(Mul(p.clone(), b(q.diff(i)?))),
                )),
                b(Pow(q.clone(), b(Num(2.0)))),
            ),
            Pow(p, q) => {
                if q.depends_on_x() {
                    return None;
                }
                Mul(
                    b(Mul(q.clone(), b(Pow(p.clone(), b(Sub(q.clone(), b(Num(1.0)))))))),
                    b(p.diff(i)?),
                )
            }
            Call(f, args) => {
                let a = &args[0];
                let da = b(a.diff(i)?);
                let outer = match f {
                    Fun::Exp => Call(Fun::Exp, args.clone()),
                    Fun::Log => Div(b(Num(1.0)), b(a.clone())),
                    Fun::Sqrt => Div(b(Num(0.5)), b(Call(Fun::Sqrt, args.clone()))),
                    Fun::Sin => Call(Fun::Cos, args.clone()),
                    Fun::Cos => Neg(b(Call(Fun::Sin, args.clone()))),
                    Fun::Cosh => Call(Fun::Sinh, args.clone()),
                    Fun::Sinh => Call(Fun::Cosh, args.clone()),
                    _ => return None,
                };
                Mul(b(outer), da)
            }
            Indicator(..) => return None,
        })
        .map(Node::simplify)
    }

    fn simplify(self) -> Node {
        use Node::*;
        let b = Box::new;
        match self {
            Neg(a) => match a.simplify() {
                Num(v) => Num(-v),
                a => Neg(b(a)),
            },
            Add(p, q) => match (p.simplify(), q.simplify()) {
                (Num(u), Num(v)) => Num(u + v),
                (Num(z), e) | (e, Num(z)) if z == 0.0 => e,
                (p, q) => Add(b(p), b(q)),
            },
            Sub(p, q) => match (p.simplify(), q.simplify()) {
                (Num(u), Num(v)) => Num(u - v),
                (e, Num(z)) if z == 0.0 => e,
                (Num(z), e) if z == 0.0 => Neg(b(e)),
                (p, q) => Sub(b(p), b(q)),
            },
            Mul(p, q) => match (p.simplify(), q.simplify()) {
                (Num(u), Num(v)) => Num(u * v),
                (Num(z), _) | (_, Num(z)) if z == 0.0 => Num(0.0),
                (Num(o), e) | (e, Num(o)) if o == 1.0 => e,
                (p, q) => Mul(b(p), b(q)),
            },
            Div(p, q) => match (p.simplify(), q.simplify()) {
                (Num(z), _) if z == 0.0 => Num(0.0),
                (e, Num(o)) if o == 1.0 => e,
                (p, q) => Div(b(p), b(q)),
            },
            Pow(p, q) => match (p.simplify(), q.simplify()) {
                (_, Num(z)) if z == 0.0 => Num(1.0),
                (e, Num(o)) if o == 1.0 => e,
                (p, q) => Pow(b(p), b(q)),
            },
            e => e,
        }
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, col));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            match text.parse::<f64>() {
                Ok(v) => out.push((Tok::Num(v), col)),
                Err(_) => return err(ParseErrorKind::Syntax, col, format!("bad number {text:?}")),
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else {
            return err(ParseErrorKind::Syntax, col, format!("unexpected character {c:?}"));
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            err(
                ParseErrorKind::Syntax,
                self.col(),
                format!("expected {what}, found {}", describe(self.peek())),
            )
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let (tok, col) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        args.push(self.expr()?);
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.expr()?);
                        }
                    }
                    self.expect(Tok::RParen, "',' or ')'")?;
                    self.call(&name, col, args)
                } else {
                    self.name(&name, col)
                }
            }
            other => err(
                ParseErrorKind::Syntax,
                col,
                format!("expected a value, found {}", describe(&other)),
            ),
        }
    }

    fn name(&self, name: &str, col: usize) -> Result<Node, ParseError> {
        match name {
            "pi" => return Ok(Node::Num(std::f64::consts::PI)),
            "inf" => return Ok(Node::Num(f64::INFINITY)),
            _ => {}
        }
        if let Some(idx) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
            if (1..=self.n).contains(&idx) && !name[1..].starts_with('0') {
                return Ok(Node::Var(idx - 1));
            }
            return err(
                ParseErrorKind::UnknownIdentifier,
                col,
                format!("variable {name} outside x1..x{}", self.n),
            );
        }
        err(ParseErrorKind::UnknownIdentifier, col, format!("{name:?}"))
    }

    fn call(&self, name: &str, col: usize, mut args: Vec<Node>) -> Result<Node, ParseError> {
        let arity = |want: &str, ok: bool| -> Result<(), ParseError> {
            if ok {
                Ok(())
            } else {
                err(
                    ParseErrorKind::Arity,
                    col,
                    format!("{name} takes {want}, got {}", args.len()),
                )
            }
        };
        let unary = |f: Fun| (f, 1usize);
        let fun = match name {
            "abs" => Some(unary(Fun::Abs)),
            "exp" => Some(unary(Fun::Exp)),
            "log" => Some(unary(Fun::Log)),
            "sqrt" => Some(unary(Fun::Sqrt)),
            "sin" => Some(unary(Fun::Sin)),
            "cos" => Some(unary(Fun::Cos)),
            "cosh" => Some(unary(Fun::Cosh)),
            "sinh" => Some(unary(Fun::Sinh)),
            _ => None,
        };
        if let Some((f, _)) = fun {
            arity("1 argument", args.len() == 1)?;
            return Ok(Node::Call(f, args));
        }
        match name {
            "max" | "min" => {
                arity("at least 1 argument", !args.is_empty())?;
                let f = if name == "max" { Fun::Max } else { Fun::Min };
                Ok(Node::Call(f, args))
            }
            "norm1" | "norm2" | "norminf" => {
                if args.is_empty() {
                    args = (0..self.n).map(Node::Var).collect();
                }
                let f = match name {
                    "norm1" => Fun::Norm1,
                    "norm2" => Fun::Norm2,
                    _ => Fun::NormInf,
                };
                Ok(Node::Call(f, args))
            }
            "indicator_ball1" | "indicator_ball2" | "indicator_ball" | "indicator_ballinf" => {
                arity("1 argument (radius)", args.len() == 1)?;
                let k = match name {
                    "indicator_ball1" => Ind::Ball1,
                    "indicator_ballinf" => Ind::BallInf,
                    _ => Ind::Ball2,
                };
                Ok(Node::Indicator(k, args))
            }
            "indicator_halfspace" => {
                arity(
                    &format!("{} arguments (a1..a{}, b)", self.n + 1, self.n),
                    args.len() == self.n + 1,
                )?;
                Ok(Node::Indicator(Ind::Halfspace, args))
            }
            _ => err(ParseErrorKind::UnknownIdentifier, col, format!("function {name:?}")),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier {s:?}"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Comma => "','".into(),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parses `src` as a function of `x1..xn`.
///
/// The result carries `proper` and `declared_lsc`; convexity and boundedness
/// must be declared by the caller with [`ScalarFunction::with_flags`].
///
/// ```
/// use givp::func::parse_objective;
/// use givp::Vector;
///
/// let f = parse_objective("x1^2 + 3*x2", 2).unwrap();
/// let x = Vector::from_row_slice(&[2.0, 1.0]);
/// assert_eq!(f.value(&x).unwrap(), 7.0);
/// assert_eq!(f.grad(&x).unwrap(), Vector::from_row_slice(&[4.0, 3.0]));
/// ```
pub fn parse_objective(src: &str, n: usize) -> Result<ScalarFunction, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, n };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return err(
            ParseErrorKind::Syntax,
            p.col(),
            format!("unexpected {}", describe(p.peek())),
        );
    }
    let partials: Option<Vec<Node>> = (0..n).map(|i| root.diff(i)).collect();
    let root = Arc::new(root);
    let r = root.clone();
    let mut f = ScalarFunction::new(src.trim(), move |x: &Vector| r.eval(x)).with_flags(Flags {
        proper: true,
        declared_lsc: true,
        ..Flags::default()
    });
    if let Some(parts) = partials {
        let parts = Arc::new(parts);
        f = f.with_grad(move |x: &Vector| {
            Vector::from_iterator(parts.len(), parts.iter().map(|d| d.eval(x)))
        });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn at(src: &str, x: &[f64]) -> f64 {
        parse_objective(src, x.len()).unwrap().eval_raw(&v(x))
    }

    /// Hand-checked arithmetic; every value is exactly representable.
    #[test]
    fn reference_table() {
        let table: [(&str, &[f64], f64); 20] = [
            ("x1^2 + x2^2", &[3.0, 4.0], 25.0),
            ("max(x1, x2)", &[-1.0, 2.0], 2.0),
            ("min(x1, x2, 0)", &[1.0, 2.0], 0.0),
            ("abs(x1) + indicator_ball2(1)", &[-0.5, 0.0], 0.5),
            ("abs(x1) + indicator_ball2(1)", &[1.0, 1.0], f64::INFINITY),
            ("2^3^2", &[0.0], 512.0),
            ("-x1^2", &[3.0], -9.0),
            ("(-x1)^2", &[3.0], 9.0),
            ("x1 - x2 - x3", &[1.0, 2.0, 3.0], -4.0),
            ("x1 / x2 / 2", &[8.0, 2.0], 2.0),
            ("norm1()", &[1.0, -2.0, 3.0], 6.0),
            ("norm2()", &[3.0, -4.0], 5.0),
            ("norminf()", &[1.0, -7.0, 3.0], 7.0),
            ("norm1(x1 - 1, x2)", &[0.0, 2.0], 3.0),
            ("1.5e1 + 2.5E-1", &[0.0], 15.25),
            ("max(0, 1 - 2*abs(x1))", &[0.25], 0.5),
            ("indicator_halfspace(1, 1, 2)", &[1.0, 1.0], 0.0),
            ("indicator_halfspace(1, 1, 2)", &[1.5, 1.0], f64::INFINITY),
            ("indicator_ballinf(1) + x1*x2", &[1.0, -1.0], -1.0),
            ("sqrt(x1) * exp(0) + log(1)", &[16.0], 4.0),
        ];
        for (src, x, want) in table {
            assert_eq!(at(src, x), want, "{src} at {x:?}");
        }
    }

    #[test]
    fn indicator_ball1_semantics() {
        assert_eq!(at("indicator_ball1(1)", &[0.5, 0.5]), 0.0);
        assert_eq!(at("indicator_ball1(1)", &[0.5, 0.6]), f64::INFINITY);
    }

    #[test]
    fn zero_times_infinity_is_undefined() {
        let f = parse_objective("0 * indicator_ball2(1)", 1).unwrap();
        assert!(f.value(&v(&[2.0])).is_err());
        assert_eq!(f.value(&v(&[0.5])).unwrap(), 0.0);
    }

    #[test]
    fn symbolic_gradients() {
        let f = parse_objective("x1^2 + x2^2", 2).unwrap();
        assert_eq!(f.grad(&v(&[1.0, -3.0])).unwrap(), v(&[2.0, -6.0]));
        let f = parse_objective("cosh(x1) * sin(x2) / x1 + sqrt(x2) - log(x1)", 2).unwrap();
        let x = v(&[0.7, 1.3]);
        let g = f.grad(&x).unwrap();
        let fd = |i: usize| {
            let mut e = Vector::zeros(2);
            e[i] = 1e-6;
            (f.eval_raw(&(&x + &e)) - f.eval_raw(&(&x - &e))) / 2e-6
        };
        for i in 0..2 {
            assert!((g[i] - fd(i)).abs() < 1e-7, "{i}: {} vs {}", g[i], fd(i));
        }
        assert!(!parse_objective("abs(x1)", 1).unwrap().has_grad());
        assert!(!parse_objective("x1^x1", 1).unwrap().has_grad());
        assert!(!parse_objective("max(x1, x2)", 2).unwrap().has_grad());
    }

    #[test]
    fn errors_carry_position_and_kind() {
        let e = parse_objective("x1 + * x2", 2).unwrap_err();
        assert_eq!((e.kind, e.column), (ParseErrorKind::Syntax, 6));
        let e = parse_objective("x3", 2).unwrap_err();
        assert_eq!((e.kind, e.column), (ParseErrorKind::UnknownIdentifier, 1));
        let e = parse_objective("1 + foo(x1)", 1).unwrap_err();
        assert_eq!((e.kind, e.column), (ParseErrorKind::UnknownIdentifier, 5));
        let e = parse_objective("abs(x1, x2)", 2).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Arity);
        let e = parse_objective("indicator_halfspace(1, 2)", 2).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Arity);
        let e = parse_objective("(x1 + 1", 1).unwrap_err();
        assert_eq!((e.kind, e.column), (ParseErrorKind::Syntax, 8));
        let e = parse_objective("x1 $ 2", 1).unwrap_err();
        assert_eq!((e.kind, e.column), (ParseErrorKind::Syntax, 4));
        assert!(parse_objective("x0", 2).is_err());
        assert!(parse_objective("x01", 2).is_err());
        assert!(e.to_string().contains("column 4"));
    }
}
