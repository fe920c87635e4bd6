//! Recursive-descent parser for polynomial strings.
//!
//! Accepts the canonical serialization (`-1 + x2 + 5*x1*x2 - 3/2*x1^2*x3`)
//! and, more loosely, parenthesised products and sums of those.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::jet::{Jet, Monomial};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1
            }
            '*' => {
                out.push(Tok::Star);
                i += 1
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // scientific notation for float input
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                out.push(Tok::Num(chars[start..i].iter().collect()));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(Error::Parse(format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

struct Parser<'a, S> {
    toks: Vec<Tok>,
    pos: usize,
    names: &'a [String],
    order: u32,
    _field: core::marker::PhantomData<S>,
}

impl<S: Scalar> Parser<'_, S> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn nvars(&self) -> usize {
        self.names.len()
    }

    fn expr(&mut self) -> Result<Jet<S>> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.next();
                -self.term()?
            }
            Some(Tok::Plus) => {
                self.next();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.next();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Jet<S>> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.next();
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Jet<S>> {
        if let Some(Tok::Minus) = self.peek() {
            self.next();
            return Ok(-self.factor()?);
        }
        let base = self.primary()?;
        if let Some(Tok::Caret) = self.peek() {
            self.next();
            match self.next() {
                Some(Tok::Num(n)) => {
                    let e: u32 = n
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent '{n}'")))?;
                    return Ok(base.pow(e));
                }
                t => return Err(Error::Parse(format!("expected exponent, found {t:?}"))),
            }
        }
        Ok(base)
    }

    fn number(&self, lit: &str) -> Result<S> {
        S::parse_literal(lit).ok_or_else(|| Error::Parse(format!("bad number '{lit}'")))
    }

    fn primary(&mut self) -> Result<Jet<S>> {
        match self.next() {
            Some(Tok::Num(n)) => {
                let mut value = self.number(&n)?;
                // `p/q` is a literal ratio; division is only allowed between numbers
                if let Some(Tok::Slash) = self.peek() {
                    self.next();
                    match self.next() {
                        Some(Tok::Num(d)) => {
                            let d = self.number(&d)?;
                            if d.is_zero() {
                                return Err(Error::Parse("division by zero".to_string()));
                            }
                            value = value / d;
                        }
                        t => {
                            return Err(Error::Parse(format!(
                                "only numeric denominators are allowed, found {t:?}"
                            )))
                        }
                    }
                }
                Ok(Jet::constant(self.nvars(), self.order, value))
            }
            Some(Tok::Ident(name)) => {
                let i = self
                    .names
                    .iter()
                    .position(|n| *n == name)
                    .ok_or_else(|| Error::Parse(format!("unknown variable '{name}'")))?;
                let mut j = Jet::zero(self.nvars(), self.order);
                j.add_term(Monomial::var(self.nvars(), i), S::one());
                Ok(j)
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(e),
                    t => Err(Error::Parse(format!("expected ')', found {t:?}"))),
                }
            }
            t => Err(Error::Parse(format!("unexpected token {t:?}"))),
        }
    }
}

pub(crate) fn parse_polynomial<S: Scalar>(s: &str, names: &[String], order: u32) -> Result<Jet<S>> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty polynomial".to_string()));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        names,
        order,
        _field: core::marker::PhantomData::<S>,
    };
    let j = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!(
            "trailing input at token {}",
            p.pos
        )));
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn parses_products_and_parentheses() {
        let names: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        let j: Jet<Rational> = parse_polynomial("(x + y)^2 - 2*x*y", &names, 3).unwrap();
        let k: Jet<Rational> = parse_polynomial("x^2 + y^2", &names, 3).unwrap();
        assert_eq!(j, k);
    }

    #[test]
    fn rejects_garbage() {
        let names = crate::jet::default_names(2);
        assert!(parse_polynomial::<Rational>("x1 + ", &names, 2).is_err());
        assert!(parse_polynomial::<Rational>("x3", &names, 2).is_err());
        assert!(parse_polynomial::<Rational>("x1/x2", &names, 2).is_err());
        assert!(parse_polynomial::<Rational>("x1 $ 2", &names, 2).is_err());
    }

    #[test]
    fn floats_accept_scientific_notation() {
        let names = crate::jet::default_names(1);
        let j: Jet<f64> = parse_polynomial("1e-3*x1 + 2.5", &names, 2).unwrap();
        assert_eq!(j.linear_coeff(0), 1e-3);
        assert_eq!(j.constant_term(), 2.5);
    }
}
