//! Infix expression syntax.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?        exponent must fold to an integer
//! primary := number | name | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Names `t x y z` and `x0..x3` are the spacetime coordinates; `u1..u4` are
//! chain parameters (mapped onto the same four slots). `pi` is a constant.
//! Functions: `sin cos exp sqrt`.

use thiserror::Error;

use crate::expr::{Expr, Func};

const MAX_DEPTH: usize = 200;
const MAX_EXPONENT: f64 = 1024.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

fn variable(name: &str) -> Option<usize> {
    match name {
        "t" | "x0" | "u1" => Some(0),
        "x" | "x1" | "u2" => Some(1),
        "y" | "x2" | "u3" => Some(2),
        "z" | "x3" | "u4" => Some(3),
        _ => None,
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat(b'/') {
                acc = acc.div(&self.unary()?);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let e = if self.eat(b'-') {
            self.unary()?.neg()
        } else if self.eat(b'+') {
            self.unary()?
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(e)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let at = self.pos;
        let exponent = self.unary()?;
        match exponent.as_const() {
            Some(n) if n.fract() == 0.0 && n.abs() <= MAX_EXPONENT => Ok(base.powi(n as i32)),
            _ => Err(ParseError {
                pos: at,
                msg: "exponent must be an integer constant".into(),
            }),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                if let Some(f) = Func::from_name(name) {
                    if !self.eat(b'(') {
                        return Err(self.error(format!("expected '(' after {name}")));
                    }
                    let arg = self.expr()?;
                    if !self.eat(b')') {
                        return Err(self.error("expected ')'"));
                    }
                    return Ok(Expr::apply(f, &arg));
                }
                if name == "pi" {
                    return Ok(Expr::constant(std::f64::consts::PI));
                }
                variable(name).map(Expr::var).ok_or(ParseError {
                    pos: start,
                    msg: format!("unknown name '{name}'"),
                })
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Expr::constant)
            .ok_or(ParseError {
                pos: start,
                msg: format!("invalid number '{text}'"),
            })
    }
}
