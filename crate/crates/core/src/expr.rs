//! Defining-function expressions: parsing, pretty-printing and lowering to
//! a series over `(z, w, ζ, ω)`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | atom ('^' integer)?
//! atom   := rational | 'i' | ident | 'conj' '(' expr ')'
//!         | 'Re' '(' expr ')' | 'Im' '(' expr ')' | '(' expr ')'
//! ```
//!
//! A rational is `p`, `p/q` or a decimal `p.q`. Identifiers are `z1..zn`,
//! `w`, and `z` when `n = 1`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::error::Error;
use crate::hypersurface::{conj_swap, hypersurface_ring, z_name, W};
use crate::scalar::{parse_fraction, GaussianRational};
use crate::series::TruncatedSeries;

pub const MAX_EXPONENT: u32 = 64;

const NON_ANALYTIC: &[&str] = &[
    "exp", "log", "ln", "sqrt", "abs", "sin", "cos", "tan", "sinh", "cosh", "tanh", "arg",
];

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown identifier `{name}` at line {line}, column {column}")]
    UnknownIdentifier { name: String, line: usize, column: usize },
    #[error("exponent at line {line}, column {column} must be a non-negative integer at most {MAX_EXPONENT}")]
    NonIntegerExponent { line: usize, column: usize },
    #[error("`{name}` at line {line}, column {column} is not a power series; truncate it by hand")]
    NonAnalytic { name: String, line: usize, column: usize },
    #[error("bad header: {0}")]
    Header(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(BigRational),
    I,
    /// `z_{j+1}`.
    Z(usize),
    W,
    Conj(Box<Expr>),
    Re(Box<Expr>),
    Im(Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // p/q is a single literal when q is an integer
            if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let value = parse_fraction(&s).ok_or_else(|| ParseError::Syntax {
                line: l0,
                column: c0,
                message: format!("malformed number `{s}`"),
            })?;
            out.push(Token { tok: Tok::Num(value), line: l0, column: c0 });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: l0,
                column: c0,
            });
            continue;
        }
        match c {
            '+' | '-' | '*' | '^' | '(' | ')' | '/' => {
                out.push(Token { tok: Tok::Sym(c), line: l0, column: c0 });
            }
            '|' => {
                return Err(ParseError::NonAnalytic {
                    name: "|…|".into(),
                    line: l0,
                    column: c0,
                })
            }
            _ => {
                return Err(ParseError::Syntax {
                    line: l0,
                    column: c0,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
        i += 1;
        col += 1;
    }
    out.push(Token { tok: Tok::End, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(t: &Token, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        let t = self.bump();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            Err(Self::syntax(&t, format!("expected `{c}`, found {}", describe(&t.tok))))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Sym('-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while self.peek().tok == Tok::Sym('*') {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.peek().tok != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let t = self.bump();
        let bad = ParseError::NonIntegerExponent {
            line: t.line,
            column: t.column,
        };
        match &t.tok {
            Tok::Num(r) if r.is_integer() && !r.is_negative() => {
                let e = r.to_integer();
                if e > BigInt::from(MAX_EXPONENT) {
                    return Err(bad);
                }
                Ok(Expr::Pow(Box::new(base), u32::try_from(e).unwrap()))
            }
            Tok::Num(_) | Tok::Sym('(') | Tok::Sym('-') | Tok::Ident(_) => Err(bad),
            other => Err(Self::syntax(&t, format!("expected an exponent, found {}", describe(other)))),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Num(r) => Ok(Expr::Num(r.clone())),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, &t),
            other => Err(Self::syntax(&t, format!("expected an operand, found {}", describe(other)))),
        }
    }

    fn ident(&mut self, name: &str, t: &Token) -> Result<Expr, ParseError> {
        let wrap = |p: &mut Self, f: fn(Box<Expr>) -> Expr| -> Result<Expr, ParseError> {
            p.expect('(')?;
            let e = p.expr()?;
            p.expect(')')?;
            Ok(f(Box::new(e)))
        };
        match name {
            "i" => Ok(Expr::I),
            "w" => Ok(Expr::W),
            "z" if self.n == 1 => Ok(Expr::Z(0)),
            "conj" => wrap(self, Expr::Conj),
            "Re" => wrap(self, Expr::Re),
            "Im" => wrap(self, Expr::Im),
            _ if NON_ANALYTIC.contains(&name) => Err(ParseError::NonAnalytic {
                name: name.into(),
                line: t.line,
                column: t.column,
            }),
            _ => {
                if let Some(k) = name.strip_prefix('z').and_then(|d| d.parse::<usize>().ok()) {
                    if (1..=self.n).contains(&k) && !name[1..].starts_with('0') {
                        return Ok(Expr::Z(k - 1));
                    }
                }
                Err(ParseError::UnknownIdentifier {
                    name: name.into(),
                    line: t.line,
                    column: t.column,
                })
            }
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(r) => format!("number `{r}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

/// Parses an expression over `z1..zn, w`.
pub fn parse(text: &str, n: usize) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, n };
    if p.peek().tok == Tok::End {
        let t = p.peek().clone();
        return Err(Parser::syntax(&t, "empty expression"));
    }
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return Err(Parser::syntax(&t, format!("unexpected {}", describe(&t.tok))));
    }
    Ok(e)
}

/// A surface file: a header line `n = <k>`, `#` comments, one expression.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceFile {
    pub n: usize,
    pub expr: Expr,
}

pub fn parse_surface_file(text: &str) -> Result<SurfaceFile, ParseError> {
    let mut n = None;
    let mut body = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('#') {
            body.push('\n');
            continue;
        }
        if n.is_none() && !line.is_empty() {
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| ParseError::Header(format!("line {}: expected `n = <k>`", idx + 1)))?;
            if lhs.trim() != "n" {
                return Err(ParseError::Header(format!("line {}: expected `n = <k>`", idx + 1)));
            }
            let k: usize = rhs
                .trim()
                .parse()
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| ParseError::Header(format!("line {}: n must be a positive integer", idx + 1)))?;
            n = Some(k);
            body.push('\n');
            continue;
        }
        body.push_str(raw);
        body.push('\n');
    }
    let n = n.ok_or_else(|| ParseError::Header("missing `n = <k>` line".into()))?;
    Ok(SurfaceFile { n, expr: parse(&body, n)? })
}

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_PREFIX: u8 = 3;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => PREC_SUM,
            Expr::Mul(..) => PREC_PRODUCT,
            Expr::Neg(_) => PREC_PREFIX,
            Expr::Num(r) if r.is_negative() => PREC_PREFIX,
            Expr::Pow(..) => 4,
            _ => PREC_ATOM,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Num(r) => {
                if r.is_negative() {
                    write!(f, "-")?;
                }
                let a = r.abs();
                if a.is_integer() {
                    write!(f, "{}", a.numer())
                } else {
                    write!(f, "{}/{}", a.numer(), a.denom())
                }
            }
            Expr::I => write!(f, "i"),
            Expr::Z(j) => write!(f, "{}", z_name(*j)),
            Expr::W => write!(f, "w"),
            Expr::Conj(e) => write!(f, "conj({e})"),
            Expr::Re(e) => write!(f, "Re({e})"),
            Expr::Im(e) => write!(f, "Im({e})"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.write_at(f, PREC_PREFIX)
            }
            Expr::Add(a, b) => {
                a.write_at(f, PREC_SUM)?;
                write!(f, " + ")?;
                b.write_at(f, PREC_PRODUCT)
            }
            Expr::Sub(a, b) => {
                a.write_at(f, PREC_SUM)?;
                write!(f, " - ")?;
                b.write_at(f, PREC_PRODUCT)
            }
            Expr::Mul(a, b) => {
                a.write_at(f, PREC_PRODUCT)?;
                write!(f, "*")?;
                b.write_at(f, PREC_PREFIX)
            }
            Expr::Pow(a, k) => {
                // a rational literal `p/q` reads back as one atom
                a.write_at(f, PREC_ATOM)?;
                write!(f, "^{k}")
            }
        }
    }

    /// Lowers to a series over `z1..zn, w, zeta1..zetan, omega`.
    pub fn lower(&self, n: usize, order: u32) -> Result<TruncatedSeries, Error> {
        let ring = hypersurface_ring(n, order)?;
        self.lower_in(&ring, n)
    }

    fn lower_in(&self, ring: &std::sync::Arc<crate::SeriesRing>, n: usize) -> Result<TruncatedSeries, Error> {
        let rec = |e: &Expr| e.lower_in(ring, n);
        Ok(match self {
            Expr::Num(r) => TruncatedSeries::constant(ring, GaussianRational::real(r.clone())),
            Expr::I => TruncatedSeries::constant(ring, GaussianRational::i()),
            Expr::Z(j) => TruncatedSeries::var(ring, &z_name(*j))?,
            Expr::W => TruncatedSeries::var(ring, W)?,
            Expr::Conj(e) => conj_swap(&rec(e)?, n),
            Expr::Re(e) => {
                let l = rec(e)?;
                (&l + &conj_swap(&l, n)).scale(&GaussianRational::from_fracs(1, 2, 0, 1))
            }
            Expr::Im(e) => {
                let l = rec(e)?;
                // 1/(2i) = −i/2
                (&l - &conj_swap(&l, n)).scale(&GaussianRational::from_fracs(0, 1, -1, 2))
            }
            Expr::Neg(e) => -&rec(e)?,
            Expr::Add(a, b) => &rec(a)? + &rec(b)?,
            Expr::Sub(a, b) => &rec(a)? - &rec(b)?,
            Expr::Mul(a, b) => &rec(a)? * &rec(b)?,
            Expr::Pow(a, k) => rec(a)?.pow(*k),
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

/// `true` when `e` contains no variable.
pub fn is_constant(e: &Expr) -> bool {
    match e {
        Expr::Num(_) | Expr::I => true,
        Expr::Z(_) | Expr::W => false,
        Expr::Conj(a) | Expr::Re(a) | Expr::Im(a) | Expr::Neg(a) | Expr::Pow(a, _) => is_constant(a),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => is_constant(a) && is_constant(b),
    }
}

/// Value of a variable-free expression.
pub fn eval_constant(e: &Expr) -> Option<GaussianRational> {
    Some(match e {
        Expr::Num(r) => GaussianRational::real(r.clone()),
        Expr::I => GaussianRational::i(),
        Expr::Z(_) | Expr::W => return None,
        Expr::Conj(a) => eval_constant(a)?.conj(),
        Expr::Re(a) => GaussianRational::real(eval_constant(a)?.re),
        Expr::Im(a) => GaussianRational::real(eval_constant(a)?.im),
        Expr::Neg(a) => -eval_constant(a)?,
        Expr::Add(a, b) => &eval_constant(a)? + &eval_constant(b)?,
        Expr::Sub(a, b) => &eval_constant(a)? - &eval_constant(b)?,
        Expr::Mul(a, b) => &eval_constant(a)? * &eval_constant(b)?,
        Expr::Pow(a, k) => {
            let base = eval_constant(a)?;
            let mut acc = GaussianRational::one();
            for _ in 0..*k {
                acc = &acc * &base;
            }
            acc
        }
    })
}

/// Parses a comma-separated tuple of constant expressions such as
/// `1/2, 3/4 + 1/5*i`.
pub fn parse_point(text: &str) -> Result<Vec<GaussianRational>, ParseError> {
    text.split(',')
        .map(|part| {
            let e = parse(part, 0)?;
            eval_constant(&e).ok_or_else(|| ParseError::Syntax {
                line: 1,
                column: 1,
                message: format!("`{}` is not a constant", part.trim()),
            })
        })
        .collect()
}
