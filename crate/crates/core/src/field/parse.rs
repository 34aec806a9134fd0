use super::{Node, ScalarField};
use crate::error::{Error, Result};

/// Parses `text` into a field over `x1..xn`.
///
/// Precedence, tightest first: `^k`, unary `-`, `*`, binary `+`/`-`.
/// Positions in syntax errors are byte offsets into `text`.
pub fn parse(text: &str, n: usize) -> Result<ScalarField> {
    if text.trim().is_empty() {
        return Err(Error::Syntax { position: 0, message: "empty expression".into() });
    }
    let mut p = Parser { src: text.as_bytes(), pos: 0, n };
    let root = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    ScalarField::new(n, root)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax { position: self.pos, message: message.to_string() }
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

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::add(lhs, self.term()?);
            } else if self.eat(b'-') {
                lhs = Node::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while self.eat(b'*') {
            lhs = Node::mul(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            Ok(Node::neg(self.unary()?))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node> {
        let mut base = self.atom()?;
        while self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("exponent must be a non-negative integer literal"));
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let k: u32 =
                digits.parse().map_err(|_| Error::Syntax { position: start, message: "exponent too large".into() })?;
            if matches!(self.src.get(self.pos), Some(b'.') | Some(b'e') | Some(b'E')) {
                return Err(self.error("exponent must be a non-negative integer literal"));
            }
            base = Node::pow(base, k);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Node::Const(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn identifier(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match word {
            "exp" => {
                self.expect(b'(')?;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(Node::exp(e))
            }
            "dot" => {
                self.expect(b'(')?;
                let mut coeffs = vec![self.signed_number()?];
                while self.eat(b',') {
                    coeffs.push(self.signed_number()?);
                }
                self.expect(b')')?;
                if coeffs.len() != self.n {
                    return Err(Error::Syntax {
                        position: start,
                        message: format!("dot() takes {} coefficients, got {}", self.n, coeffs.len()),
                    });
                }
                Ok(Node::Dot(coeffs))
            }
            _ if word.starts_with('x') && word.len() > 1 && word[1..].bytes().all(|b| b.is_ascii_digit()) => {
                let index: usize = word[1..]
                    .parse()
                    .map_err(|_| Error::Syntax { position: start, message: "bad variable index".into() })?;
                if index == 0 || index > self.n {
                    return Err(Error::VariableOutOfRange { index, dim: self.n });
                }
                Ok(Node::Var(index - 1))
            }
            _ => Err(Error::Syntax { position: start, message: format!("unknown identifier '{word}'") }),
        }
    }

    fn signed_number(&mut self) -> Result<f64> {
        let neg = self.eat(b'-');
        if !neg {
            self.eat(b'+');
        }
        self.skip_ws();
        let v = self.number()?;
        Ok(if neg { -v } else { v })
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let digits = |s: &mut Self| {
            let b = s.pos;
            while s.pos < s.src.len() && s.src[s.pos].is_ascii_digit() {
                s.pos += 1;
            }
            s.pos - b
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            return Err(self.error("expected a number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(self.error("malformed exponent in number"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map_err(|_| Error::Syntax { position: start, message: format!("bad number '{text}'") })
    }
}
