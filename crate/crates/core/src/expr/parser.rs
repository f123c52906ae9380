//! Recursive-descent parser for coefficient expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | '+' unary | power
//! power  := atom ('^' int)?
//! int    := ['-' | '+'] digits | '(' int ')'
//! atom   := number | 'x' digits | func '(' expr ')' | '(' expr ')'
//! ```

use std::fmt;

use super::{Expr, Func};
use crate::scalar::parse_rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    /// 0-based byte offset into the input.
    pub pos: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at column {}", self.message, self.pos + 1)
    }
}

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
    End,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    n: usize,
}

pub(super) fn parse(text: &str, n: usize) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    if toks.len() == 1 {
        return Err(ParseError { pos: 0, message: "empty expression".into() });
    }
    let mut p = Parser { toks, at: 0, n };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(p.error(format!("unexpected {}", describe(t)))),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        let tok = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                out.push((Tok::Num(text[start..i].to_string()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            other => {
                return Err(ParseError { pos: start, message: format!("unexpected character `{other}`") })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(s) | Tok::Ident(s) => format!("`{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
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
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn error(&self, message: String) -> ParseError {
        ParseError { pos: self.pos(), message }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", describe(&want), describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::neg(self.unary()?))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let e = self.int()?;
        Ok(Expr::pow(base, e))
    }

    fn int(&mut self) -> Result<i32, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::LParen => {
                let v = self.int()?;
                self.expect(Tok::RParen)?;
                Ok(v)
            }
            Tok::Minus => Ok(-self.int()?),
            Tok::Plus => self.int(),
            Tok::Num(s) => s.parse::<i32>().map_err(|_| ParseError {
                pos,
                message: format!("exponent `{s}` is not an integer"),
            }),
            t => Err(ParseError { pos, message: format!("expected integer exponent, found {}", describe(&t)) }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(s) => parse_rational(&s)
                .map(Expr::Const)
                .ok_or(ParseError { pos, message: format!("malformed number `{s}`") }),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::call(func, arg));
                }
                let index = name
                    .strip_prefix('x')
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or(ParseError { pos, message: format!("unknown identifier `{name}`") })?;
                if index == 0 || index > self.n {
                    return Err(ParseError {
                        pos,
                        message: format!("variable `{name}` out of range x1..x{}", self.n),
                    });
                }
                Ok(Expr::Var(index - 1))
            }
            t => Err(ParseError { pos, message: format!("expected operand, found {}", describe(&t)) }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_positions() {
        let err = parse("x1 + * x2", 2).unwrap_err();
        assert_eq!(err.pos, 5);
        let err = parse("x1 + x4", 3).unwrap_err();
        assert_eq!(err.pos, 5);
        assert!(err.message.contains("out of range"));
        let err = parse("exp(x1", 1).unwrap_err();
        assert_eq!(err.pos, 6);
        assert!(parse("", 1).is_err());
        assert!(parse("x1^1.5", 1).is_err());
        assert!(parse("y1", 1).is_err());
        assert!(parse("x1 $ 2", 1).is_err());
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse("-x1^2", 1).unwrap();
        assert_eq!(e.eval::<f64>(&[3.0]).unwrap(), -9.0);
        let e = parse("2^-1", 1).unwrap();
        assert_eq!(e.eval::<f64>(&[0.0]).unwrap(), 0.5);
    }
}
