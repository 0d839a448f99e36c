//! Recursive-descent parser for the infix expression grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := number | '-' factor | ident '(' expr ')' | ident | '(' expr ')'
//! ```
//!
//! A minus sign directly before a number literal yields a negative constant;
//! before anything else it yields `-1 * factor`. Identifiers are resolved
//! against the parser's variable names first, then as `x<k>`; a bare `x`
//! means `x0`. `·` and `×` are accepted as multiplication.

use super::{BinaryOp, Expr, UnaryOp};
use crate::error::{Error, Result};

/// Parses with the canonical `x<k>` variable names.
pub fn parse(text: &str) -> Result<Expr> {
    Parser::default().parse(text)
}

#[derive(Debug, Clone, Default)]
pub struct Parser {
    names: Vec<String>,
}

impl Parser {
    pub fn with_variables<S: AsRef<str>>(names: &[S]) -> Self {
        Self {
            names: names.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn parse(&self, text: &str) -> Result<Expr> {
        let mut state = State {
            src: text,
            pos: 0,
            names: &self.names,
        };
        let e = state.expr()?;
        state.skip_ws();
        if state.pos < text.len() {
            return Err(state.error("unexpected trailing input"));
        }
        Ok(e)
    }
}

struct State<'a> {
    src: &'a str,
    pos: usize,
    names: &'a [String],
}

impl State<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some('+') => BinaryOp::Add,
                Some('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some('*' | '·' | '×') => BinaryOp::Mul,
                Some('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.bump();
                let e = self.expr()?;
                if self.bump() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some('-') => {
                self.bump();
                match self.peek() {
                    Some(c) if c.is_ascii_digit() || c == '.' => {
                        Ok(Expr::Const(-self.number()?))
                    }
                    _ => Ok(Expr::mul(Expr::Const(-1.0), self.factor()?)),
                }
            }
            Some(c) if c.is_ascii_digit() || c == '.' => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_alphabetic() || c == '_' => self.identifier(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let bytes = self.rest().as_bytes();
        let mut end = 0;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            let digits_start = k;
            while k < bytes.len() && bytes[k].is_ascii_digit() {
                k += 1;
            }
            if k > digits_start {
                end = k;
            }
        }
        let text = &self.rest()[..end];
        let v = text
            .parse::<f64>()
            .map_err(|_| self.error(&format!("malformed number {text:?}")))?;
        self.pos += end;
        Ok(v)
    }

    fn identifier(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        let len: usize = self
            .rest()
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .map(char::len_utf8)
            .sum();
        let ident = &self.src[start..start + len];
        self.pos += len;

        if self.peek() == Some('(') {
            let op = UnaryOp::from_name(ident).ok_or_else(|| Error::Syntax {
                position: start,
                message: format!("unknown function `{ident}`"),
            })?;
            self.bump();
            let arg = self.expr()?;
            if self.bump() != Some(')') {
                return Err(self.error("expected `)` after function argument"));
            }
            return Ok(Expr::unary(op, arg));
        }
        if let Some(i) = self.names.iter().position(|n| n == ident) {
            return Ok(Expr::Var(i));
        }
        if ident == "x" {
            return Ok(Expr::Var(0));
        }
        if let Some(k) = ident.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            return Ok(Expr::Var(k));
        }
        Err(Error::Syntax {
            position: start,
            message: format!("unknown variable `{ident}`"),
        })
    }
}
