//! Canonical text form of polynomials and the small expression language used
//! for ODE right-hand sides.
//!
//! Grammar: `+ - * ^ ( )`, integer and `p/q` rational literals, identifiers.
//! Products must be written with an explicit `*`; `/` is only legal inside a
//! rational literal and `^` takes a nonnegative integer literal.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::monomial::Monomial;
use super::multipoly::MultiPoly;
use super::Rational;
use crate::error::{Error, Result};

const MAX_EXPONENT: u32 = 1000;

/// Canonical variable names `x1..xn, h`.
pub fn canonical_names(nvars: usize) -> Vec<String> {
    (1..=nvars)
        .map(|i| format!("x{i}"))
        .chain(std::iter::once("h".to_string()))
        .collect()
}

pub fn to_canonical_text(p: &MultiPoly) -> String {
    to_text_with_names(p, &canonical_names(p.nvars()))
}

/// Print with one name per slot, terms in descending graded-lex order.
pub fn to_text_with_names<S: AsRef<str>>(p: &MultiPoly, names: &[S]) -> String {
    assert_eq!(names.len(), p.slots());
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono = monomial_text(m, names);
        if mono.is_empty() {
            out.push_str(&abs.to_string());
        } else if abs.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&abs.to_string());
            out.push('*');
            out.push_str(&mono);
        }
    }
    out
}

fn monomial_text<S: AsRef<str>>(m: &Monomial, names: &[S]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.exponents().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(names[i].as_ref().to_string()),
            _ => parts.push(format!("{}^{}", names[i].as_ref(), e)),
        }
    }
    parts.join("*")
}

/// Parse canonical text over `x1..xn, h`.
pub fn parse_poly(src: &str, nvars: usize) -> Result<MultiPoly> {
    let names = canonical_names(nvars);
    parse_expression(src, nvars, 1, 1, &|name| {
        names.iter().position(|n| n == name)
    })
}

/// Parse an expression, resolving identifiers to slots with `resolve`.
///
/// `line` and `column` locate the first character of `src` in its source file
/// for error reporting.
pub fn parse_expression(
    src: &str,
    nvars: usize,
    line: usize,
    column: usize,
    resolve: &dyn Fn(&str) -> Option<usize>,
) -> Result<MultiPoly> {
    let tokens = tokenize(src, line, column)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        nvars,
        line,
        end_column: column + src.chars().count(),
        resolve,
    };
    let expr = parser.expr()?;
    if let Some(tok) = parser.peek() {
        return Err(parser.error_at(tok.column, "unexpected token after expression"));
    }
    Ok(expr)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    column: usize,
    /// Integer literal without a `/` part, usable as an exponent.
    integer: Option<u64>,
}

fn tokenize(src: &str, line: usize, column: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |at: usize, msg: &str| Error::Syntax {
        line,
        column: column + at,
        message: msg.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
        let col = column + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token {
                tok,
                column: col,
                integer: None,
            });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let num: String = chars[start..i].iter().collect();
            let num: BigInt = num.parse().map_err(|_| err(start, "bad integer literal"))?;
            let mut j = i;
            while j < chars.len() && chars[j].is_whitespace() {
                j += 1;
            }
            if j < chars.len() && chars[j] == '/' {
                j += 1;
                while j < chars.len() && chars[j].is_whitespace() {
                    j += 1;
                }
                let dstart = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if dstart == j {
                    return Err(err(dstart, "expected integer denominator after `/`"));
                }
                let den: String = chars[dstart..j].iter().collect();
                let den: BigInt = den.parse().map_err(|_| err(dstart, "bad integer literal"))?;
                if den.is_zero() {
                    return Err(err(dstart, "zero denominator in rational literal"));
                }
                out.push(Token {
                    tok: Tok::Num(Rational::new(num, den)),
                    column: column + start,
                    integer: None,
                });
                i = j;
            } else {
                let small = u64::try_from(&num).ok();
                out.push(Token {
                    tok: Tok::Num(Rational::from_integer(num)),
                    column: column + start,
                    integer: small,
                });
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column: column + start,
                integer: None,
            });
            continue;
        }
        if c == '/' {
            return Err(err(i, "`/` is only allowed inside rational literals such as 3/4"));
        }
        return Err(err(i, &format!("unexpected character `{c}`")));
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    nvars: usize,
    line: usize,
    end_column: usize,
    resolve: &'a dyn Fn(&str) -> Option<usize>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn error_at(&self, column: usize, msg: &str) -> Error {
        Error::Syntax {
            line: self.line,
            column,
            message: msg.to_string(),
        }
    }

    fn here(&self) -> usize {
        self.peek().map(|t| t.column).unwrap_or(self.end_column)
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    let col = self.here();
                    return Err(self.error_at(col, "expected an operator; products need an explicit `*`"));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<MultiPoly> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MultiPoly> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek().map(|t| &t.tok) {
            self.pos += 1;
            let col = self.here();
            let tok = self.peek().cloned();
            match tok {
                Some(Token {
                    integer: Some(e), ..
                }) => {
                    self.pos += 1;
                    if e > MAX_EXPONENT as u64 {
                        return Err(self.error_at(col, "exponent too large"));
                    }
                    if let Some(Tok::Caret) = self.peek().map(|t| &t.tok) {
                        let c = self.here();
                        return Err(self.error_at(c, "chained `^` needs parentheses"));
                    }
                    Ok(base.pow(e as u32))
                }
                _ => Err(self.error_at(col, "expected a nonnegative integer exponent after `^`")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        let col = self.here();
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(self.error_at(col, "unexpected end of expression")),
        };
        self.pos += 1;
        match tok.tok {
            Tok::Num(v) => Ok(MultiPoly::constant(self.nvars, v)),
            Tok::Ident(name) => match (self.resolve)(&name) {
                Some(slot) => Ok(MultiPoly::var(self.nvars, slot)),
                None => Err(Error::UnknownVariable {
                    name,
                    line: self.line,
                    column: tok.column,
                }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => {
                        let c = self.here();
                        Err(self.error_at(c, "expected `)`"))
                    }
                }
            }
            _ => Err(self.error_at(tok.column, "expected a number, variable or `(`")),
        }
    }
}
