//! Recursive-descent parser for coordinate expressions.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" ["-"|"+"] integer)?
//! atom   := number | ident | func "(" expr ")" | "(" expr ")"
//! ```

use num::{BigInt, BigRational, One, Zero};

use super::expr::{Expr, UnaryOp};
use crate::error::{Error, Result};

/// Parses `text` against the given coordinate names.
pub fn parse_expr(text: &str, coords: &[String]) -> Result<Expr> {
    let mut p = Parser { src: text, pos: 0, coords };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    coords: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn syntax(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(Expr::neg(self.term()?));
            } else {
                break;
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat('*') {
                factors.push(self.unary()?);
            } else if self.eat('/') {
                factors.push(Expr::unary(UnaryOp::Inv, self.unary()?));
            } else {
                break;
            }
        }
        Ok(Expr::mul(factors))
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        let mut negative = false;
        if self.peek() == Some('-') || self.peek() == Some('+') {
            negative = self.bump() == Some('-');
        }
        let digits_start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        if self.pos == digits_start
            || matches!(self.peek(), Some('.') | Some('e') | Some('E'))
            || self.peek().is_some_and(|c| c.is_alphabetic())
        {
            return Err(Error::NonIntegerExponent { offset: start });
        }
        let k: i32 = self.src[digits_start..self.pos]
            .parse()
            .map_err(|_| Error::NonIntegerExponent { offset: start })?;
        Ok(Expr::pow(base, if negative { -k } else { k }))
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some('(') => {
                self.bump();
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_alphabetic() || c == '_' => {
                while self
                    .peek()
                    .is_some_and(|c| c.is_alphanumeric() || c == '_')
                {
                    self.bump();
                }
                let name = &self.src[start..self.pos];
                if let Some(i) = self.coords.iter().position(|n| n == name) {
                    return Ok(Expr::var(i));
                }
                if let Some(op) = UnaryOp::from_name(name) {
                    if self.eat('(') {
                        let arg = self.expr()?;
                        if !self.eat(')') {
                            return Err(self.syntax("expected `)`"));
                        }
                        return Ok(Expr::unary(op, arg));
                    }
                }
                Err(Error::UnknownIdentifier {
                    name: name.to_string(),
                    offset: start,
                })
            }
            Some(_) => Err(self.syntax("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let mut mantissa = String::new();
        let mut frac_digits = 0i64;
        let mut seen_dot = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                mantissa.push(c);
                if seen_dot {
                    frac_digits += 1;
                }
            } else if c == '.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.bump();
        }
        if mantissa.is_empty() {
            return Err(Error::Syntax {
                offset: start,
                message: "malformed number".into(),
            });
        }
        let mut exp10 = -frac_digits;
        if matches!(self.peek(), Some('e') | Some('E')) {
            let save = self.pos;
            self.bump();
            let mut sign = 1i64;
            if self.peek() == Some('-') || self.peek() == Some('+') {
                if self.bump() == Some('-') {
                    sign = -1;
                }
            }
            let ds = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
            if self.pos == ds {
                self.pos = save;
                return Err(Error::Syntax {
                    offset: save,
                    message: "malformed exponent".into(),
                });
            }
            let e: i64 = self.src[ds..self.pos].parse().map_err(|_| Error::Syntax {
                offset: ds,
                message: "exponent out of range".into(),
            })?;
            exp10 += sign * e;
        }
        let m: BigInt = mantissa.parse().expect("digits");
        let ten = BigRational::from_integer(BigInt::from(10));
        let mut q = BigRational::from_integer(m);
        let mut scale = BigRational::one();
        for _ in 0..exp10.unsigned_abs() {
            scale *= &ten;
        }
        if exp10 < 0 {
            q /= scale;
        } else {
            q *= scale;
        }
        debug_assert!(!q.denom().is_zero());
        Ok(Expr::constant(q))
    }
}

/// Parses a decimal or `p/q` literal into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return Err(Error::Syntax {
                offset: 0,
                message: format!("zero denominator in `{text}`"),
            });
        }
        return Ok(p / q);
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let e = parse_expr(body, &[])?;
    match e.as_const() {
        Some(q) => Ok(if neg { -q.clone() } else { q.clone() }),
        None => Err(Error::Syntax {
            offset: 0,
            message: format!("`{text}` is not a numeric literal"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_ir::expr::Node;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn grammar_reading() {
        let c = names(&["u", "v", "x"]);
        let e = parse_expr("2*u*v + x^2", &c).unwrap();
        match e.node() {
            Node::Add(ts) => {
                assert_eq!(ts.len(), 2);
                match ts[0].node() {
                    Node::Mul(fs) => {
                        assert_eq!(fs.len(), 3);
                        assert!(fs[0].as_const().is_some());
                    }
                    other => panic!("{other:?}"),
                }
                assert!(matches!(ts[1].node(), Node::Pow(_, 2)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unary_minus_binds_looser_than_pow() {
        let c = names(&["x"]);
        let e = parse_expr("-x^2", &c).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), -9.0);
    }

    #[test]
    fn sin_zero() {
        let e = parse_expr("sin(0)", &[]).unwrap();
        assert_eq!(e.eval(&[]).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let c = names(&["x"]);
        assert!(matches!(
            parse_expr("x + q", &c),
            Err(Error::UnknownIdentifier { offset: 4, .. })
        ));
        assert!(matches!(
            parse_expr("x^2.5", &c),
            Err(Error::NonIntegerExponent { .. })
        ));
        assert!(matches!(parse_expr("x + ", &c), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expr("(x", &c), Err(Error::Syntax { .. })));
    }

    #[test]
    fn decimals_are_exact() {
        let q = parse_rational("1.25").unwrap();
        assert_eq!(q, BigRational::new(5.into(), 4.into()));
        assert_eq!(parse_rational("-3/4").unwrap(), BigRational::new((-3).into(), 4.into()));
        assert_eq!(parse_rational("2e-1").unwrap(), BigRational::new(1.into(), 5.into()));
    }

    #[test]
    fn unicode_identifiers() {
        let c = names(&["θ"]);
        let e = parse_expr("sin(θ)^2", &c).unwrap();
        assert!((e.eval(&[1.0]).unwrap() - 1f64.sin().powi(2)).abs() < 1e-15);
    }
}
