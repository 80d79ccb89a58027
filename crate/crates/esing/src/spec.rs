//! Curve specifications: a small text format naming the characteristic, an
//! optional extension degree, and either an equation or a list of
//! parametrized branches.
//!
//! ```text
//! p=2; f = y^4 + x^6 + x^7
//! p=5; branches = [(t^2, t^3), (t, t^5 + 2*t^7)]
//! p=3; ext=2; f = y^2 - a*x^2 + x^3      # `a` generates F_9 over F_3
//! ```
//!
//! Statements are separated by `;` or newlines and `#` starts a comment.
//! Besides `p`, `ext`, `f` and `branches`, the optional keys `precision`
//! and `pdeg` override the series precision and the stratum degree bound.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::coeffield::{make_field, Field};
use crate::error::{Error, Result};
use crate::series::{implicitize, BiSeries, Branch, UniSeries};

/// The curve described by a specification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveInput {
    Equation(BiSeries),
    Branches(Vec<Branch>),
}

/// A validated curve specification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveSpec {
    pub characteristic: u64,
    pub ext_degree: u32,
    pub field: Field,
    pub input: CurveInput,
    pub precision: Option<usize>,
    pub pdeg: Option<usize>,
}

impl CurveSpec {
    /// The curve equation; for branch input the product of the implicit
    /// equations of the branches.
    pub fn equation(&self) -> Result<BiSeries> {
        match &self.input {
            CurveInput::Equation(f) => Ok(f.clone()),
            CurveInput::Branches(brs) => {
                let mut f = BiSeries::one(&self.field);
                for b in brs {
                    f = f.mul(&implicitize(b)?);
                }
                Ok(f)
            }
        }
    }

    /// Canonical one-line rendering, itself a valid specification.
    pub fn to_text(&self) -> String {
        let mut s = format!("p={};", self.characteristic);
        if self.ext_degree > 1 {
            s += &format!(" ext={};", self.ext_degree);
        }
        match &self.input {
            CurveInput::Equation(f) => s += &format!(" f = {f}"),
            CurveInput::Branches(brs) => {
                let parts: Vec<String> = brs.iter().map(|b| format!("({}, {})", b.x.format("t"), b.y.format("t"))).collect();
                s += &format!(" branches = [{}]", parts.join(", "));
            }
        }
        s
    }
}

/// Read and parse a specification file.
pub fn parse_spec_file(path: &std::path::Path) -> Result<CurveSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    parse_spec(&text)
}

/// Parse a specification from text.
pub fn parse_spec(text: &str) -> Result<CurveSpec> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let mut stmts: Vec<(String, Pos, Value)> = Vec::new();
    loop {
        p.skip_separators();
        if p.at_end() {
            break;
        }
        let (name, pos) = p.ident()?;
        if stmts.iter().any(|(n, _, _)| *n == name) {
            return Err(perr(pos, format!("duplicate key `{name}`")));
        }
        p.expect(&Tok::Eq)?;
        let value = match name.as_str() {
            "p" | "ext" | "precision" | "pdeg" => Value::Int(p.integer()?),
            "f" => Value::Expr(p.expr()?),
            "branches" => Value::Branches(p.branch_list()?),
            _ => return Err(perr(pos, format!("unknown key `{name}`"))),
        };
        stmts.push((name, pos, value));
        if !p.at_end() && !p.at_separator() {
            return Err(perr(p.pos(), format!("expected `;` or end of line, found {}", p.peek_desc())));
        }
    }
    let end = p.pos();
    let get = |k: &str| stmts.iter().find(|(n, _, _)| n == k);
    let int_of = |k: &str| -> Result<Option<(BigInt, Pos)>> {
        Ok(get(k).map(|(_, pos, v)| match v {
            Value::Int(n) => (n.clone(), *pos),
            _ => unreachable!(),
        }))
    };
    let (pv, ppos) = int_of("p")?.ok_or_else(|| perr(end, "missing characteristic `p=<int>`".into()))?;
    let characteristic = pv.to_u64().ok_or_else(|| perr(ppos, "characteristic out of range".into()))?;
    if characteristic != 0 && !is_prime(characteristic) {
        return Err(Error::UnsupportedCharacteristic(characteristic));
    }
    let ext_degree = match int_of("ext")? {
        None => 1,
        Some((n, pos)) => n.to_u32().filter(|&k| k >= 1).ok_or_else(|| perr(pos, "extension degree must be a positive integer".into()))?,
    };
    let small = |k: &str, min: usize| -> Result<Option<usize>> {
        match int_of(k)? {
            None => Ok(None),
            Some((n, pos)) => n.to_usize().filter(|&v| v >= min).map(Some).ok_or_else(|| perr(pos, format!("`{k}` must be an integer >= {min}"))),
        }
    };
    let precision = small("precision", 1)?;
    // a zero degree bound is accepted here and rejected by the stratum computation
    let pdeg = small("pdeg", 0)?;
    let field = make_field(characteristic, ext_degree)?;
    let input = match (get("f"), get("branches")) {
        (Some(_), Some((_, pos, _))) => return Err(perr(*pos, "give either `f` or `branches`, not both".into())),
        (None, None) => return Err(perr(end, "missing curve: `f = <poly>` or `branches = [...]`".into())),
        (Some((_, _, Value::Expr(e))), None) => CurveInput::Equation(eval_xy(&field, e)?),
        (None, Some((_, _, Value::Branches(list)))) => {
            let mut brs = Vec::new();
            for (x, y) in list {
                brs.push(Branch::new(eval_t(&field, x)?, eval_t(&field, y)?));
            }
            CurveInput::Branches(brs)
        }
        _ => unreachable!(),
    };
    Ok(CurveSpec { characteristic, ext_degree, field, input, precision, pdeg })
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

// ---------------------------------------------------------------------------
// tokens

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

fn perr(pos: Pos, msg: String) -> Error {
    Error::Parse { line: pos.line, col: pos.col, msg }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
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
    Eq,
    Sep,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("`{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sep => "end of statement".into(),
            t => format!(
                "`{}`",
                match t {
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Star => "*",
                    Tok::Slash => "/",
                    Tok::Caret => "^",
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::Comma => ",",
                    _ => "=",
                }
            ),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = Pos { line: li + 1, col: i + 1 };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push((Tok::Int(s.parse().unwrap()), pos));
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
                continue;
            }
            let t = match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                '=' => Tok::Eq,
                ';' => Tok::Sep,
                _ => return Err(perr(pos, format!("unexpected character `{c}`"))),
            };
            match t {
                Tok::LParen | Tok::LBracket => depth += 1,
                Tok::RParen | Tok::RBracket => depth = depth.saturating_sub(1),
                _ => {}
            }
            out.push((t, pos));
            i += 1;
        }
        // a newline ends a statement unless a bracket is still open
        if depth == 0 {
            out.push((Tok::Sep, Pos { line: li + 1, col: chars.len() + 1 }));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// syntax tree

#[derive(Clone, Debug)]
enum Expr {
    Int(BigInt),
    Var(String, Pos),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, Pos),
    Pow(Box<Expr>, usize),
}

enum Value {
    Int(BigInt),
    Expr(Expr),
    Branches(Vec<(Expr, Expr)>),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    pos: usize,
}

/// Exponents beyond this are rejected rather than expanded.
const MAX_EXPONENT: usize = 4096;

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn at_separator(&self) -> bool {
        matches!(self.peek(), Some(Tok::Sep))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_desc(&self) -> String {
        self.peek().map(|t| t.describe()).unwrap_or_else(|| "end of input".into())
    }

    fn pos(&self) -> Pos {
        match self.toks.get(self.pos) {
            Some((_, p)) => *p,
            None => self.toks.last().map(|(_, p)| *p).unwrap_or(Pos { line: 1, col: 1 }),
        }
    }

    fn skip_separators(&mut self) {
        while self.at_separator() {
            self.pos += 1;
        }
    }

    fn bump(&mut self) -> Option<(Tok, Pos)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: &Tok) -> Result<()> {
        if self.peek() == Some(t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(perr(self.pos(), format!("expected {}, found {}", t.describe(), self.peek_desc())))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos)> {
        let pos = self.pos();
        match self.bump() {
            Some((Tok::Ident(s), _)) => Ok((s, pos)),
            _ => {
                self.pos -= 1;
                Err(perr(pos, format!("expected a key, found {}", self.peek_desc())))
            }
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        let pos = self.pos();
        match self.bump() {
            Some((Tok::Int(n), _)) => Ok(n),
            _ => {
                self.pos -= 1;
                Err(perr(pos, format!("expected an integer, found {}", self.peek_desc())))
            }
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Expr::Neg(Box::new(self.term()?))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    let pos = self.pos();
                    self.pos += 1;
                    acc = Expr::Div(Box::new(acc), Box::new(self.factor()?), pos);
                }
                // implicit product such as `3x` or `2(x + y)`
                Some(Tok::Ident(_)) | Some(Tok::LParen) => acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?)),
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let pos = self.pos();
            let e = self.integer()?;
            let e = e.to_usize().filter(|&e| e <= MAX_EXPONENT).ok_or_else(|| perr(pos, format!("exponent must be at most {MAX_EXPONENT}")))?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Some((Tok::Int(n), _)) => Ok(Expr::Int(n)),
            Some((Tok::Ident(s), _)) => Ok(Expr::Var(s, pos)),
            Some((Tok::LParen, _)) => {
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Some((Tok::Minus, _)) => Ok(Expr::Neg(Box::new(self.factor()?))),
            _ => {
                self.pos -= 1;
                Err(perr(pos, format!("expected a number, variable or `(`, found {}", self.peek_desc())))
            }
        }
    }

    fn branch_list(&mut self) -> Result<Vec<(Expr, Expr)>> {
        self.expect(&Tok::LBracket)?;
        let mut out = Vec::new();
        if self.peek() == Some(&Tok::RBracket) {
            return Err(perr(self.pos(), "branch list is empty".into()));
        }
        loop {
            self.expect(&Tok::LParen)?;
            let x = self.expr()?;
            self.expect(&Tok::Comma)?;
            let y = self.expr()?;
            self.expect(&Tok::RParen)?;
            out.push((x, y));
            match self.peek() {
                Some(Tok::Comma) => self.pos += 1,
                _ => break,
            }
        }
        self.expect(&Tok::RBracket)?;
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// evaluation

/// Evaluate with `vars` naming the first and second variable of a
/// bivariate polynomial (the second may be absent).
fn eval(k: &Field, e: &Expr, vars: (&str, Option<&str>)) -> Result<BiSeries> {
    Ok(match e {
        Expr::Int(n) => BiSeries::monomial(k, 0, 0, k.from_bigint(n)),
        Expr::Var(v, pos) => {
            if v == vars.0 {
                BiSeries::monomial(k, 1, 0, k.one())
            } else if Some(v.as_str()) == vars.1 {
                BiSeries::monomial(k, 0, 1, k.one())
            } else if v == "a" {
                let g = k.generator().map_err(|_| perr(*pos, "`a` needs an extension field (`ext=<k>` with k > 1)".into()))?;
                BiSeries::monomial(k, 0, 0, g)
            } else {
                let allowed = match vars.1 {
                    Some(w) => format!("`{}`, `{w}`", vars.0),
                    None => format!("`{}`", vars.0),
                };
                return Err(perr(*pos, format!("unknown variable `{v}` (expected {allowed} or `a`)")));
            }
        }
        Expr::Neg(a) => eval(k, a, vars)?.neg(),
        Expr::Add(a, b) => eval(k, a, vars)?.add(&eval(k, b, vars)?),
        Expr::Sub(a, b) => eval(k, a, vars)?.sub(&eval(k, b, vars)?),
        Expr::Mul(a, b) => eval(k, a, vars)?.mul(&eval(k, b, vars)?),
        Expr::Pow(a, n) => {
            let b = eval(k, a, vars)?;
            let mut acc = BiSeries::one(k);
            for _ in 0..*n {
                acc = acc.mul(&b);
            }
            acc
        }
        Expr::Div(a, b, pos) => {
            let num = eval(k, a, vars)?;
            let den = eval(k, b, vars)?;
            let c = match den.terms().collect::<Vec<_>>().as_slice() {
                [((0, 0), c)] => (*c).clone(),
                [] => return Err(perr(*pos, "division by zero".into())),
                _ => return Err(perr(*pos, "can only divide by a constant".into())),
            };
            let inv = k.inv(&c).map_err(|_| perr(*pos, "division by zero".into()))?;
            num.scale(&inv)
        }
    })
}

fn eval_xy(k: &Field, e: &Expr) -> Result<BiSeries> {
    eval(k, e, ("x", Some("y")))
}

fn eval_t(k: &Field, e: &Expr) -> Result<UniSeries> {
    let b = eval(k, e, ("t", None))?;
    let deg = b.x_degree().unwrap_or(0);
    let coeffs = (0..=deg).map(|i| b.coef(i, 0)).collect();
    Ok(UniSeries::exact(k, coeffs))
}
