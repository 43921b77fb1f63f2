//! Minimal arithmetic expressions for custom warp functions.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, `sin`, `cos`, numeric
//! literals, `pi`, and the radial variable `rho`. Custom profiles supply
//! `f`, `f'`, `f''` as three such expressions; they are parsed and validated
//! up front, never trusted.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Rho,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(ExprError::Parse { pos: p.pos, msg: "trailing input".into() });
        }
        Ok(e)
    }

    pub fn eval(&self, rho: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Rho => rho,
            Expr::Add(a, b) => a.eval(rho) + b.eval(rho),
            Expr::Sub(a, b) => a.eval(rho) - b.eval(rho),
            Expr::Mul(a, b) => a.eval(rho) * b.eval(rho),
            Expr::Div(a, b) => a.eval(rho) / b.eval(rho),
            Expr::Pow(a, b) => a.eval(rho).powf(b.eval(rho)),
            Expr::Neg(a) => -a.eval(rho),
            Expr::Sin(a) => a.eval(rho).sin(),
            Expr::Cos(a) => a.eval(rho).cos(),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, msg: &str) -> Result<T, ExprError> {
        Err(ExprError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // unary minus binds looser than the right-associative power, so
    // -2^2 parses as -(2^2)
    fn factor(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => self.err("expected a number, identifier, or '('"),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit()
                || self.src[self.pos] == b'.'
                || self.src[self.pos] == b'e'
                || self.src[self.pos] == b'E'
                || ((self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
                    && self.pos > start
                    && (self.src[self.pos - 1] == b'e' || self.src[self.pos - 1] == b'E')))
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr::Num(v)),
            Err(_) => self.err(&format!("bad numeric literal '{text}'")),
        }
    }

    fn ident(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_owned();
        match name.as_str() {
            "rho" => Ok(Expr::Rho),
            "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            "sin" | "cos" => {
                if self.peek() != Some(b'(') {
                    return self.err(&format!("{name} must be called as {name}(...)"));
                }
                self.pos += 1;
                let arg = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(if name == "sin" {
                    Expr::Sin(Box::new(arg))
                } else {
                    Expr::Cos(Box::new(arg))
                })
            }
            _ => self.err(&format!("unknown identifier '{name}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_and_evaluates() {
        let e = Expr::parse("sin(rho) * (1 + 0.05 * sin(rho)^2)").unwrap();
        let rho = 1.3;
        assert_relative_eq!(
            e.eval(rho),
            rho.sin() * (1.0 + 0.05 * rho.sin().powi(2)),
            max_relative = 1e-15
        );
    }

    #[test]
    fn precedence_and_unary() {
        assert_relative_eq!(Expr::parse("2 + 3 * 4").unwrap().eval(0.0), 14.0);
        assert_relative_eq!(Expr::parse("-2^2").unwrap().eval(0.0), -4.0);
        assert_relative_eq!(Expr::parse("2^3^2").unwrap().eval(0.0), 512.0);
        assert_relative_eq!(Expr::parse("(2 + 3) * 4").unwrap().eval(0.0), 20.0);
        assert_relative_eq!(Expr::parse("pi / 2").unwrap().eval(0.0), std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(Expr::parse("1e-3 + 2E2").unwrap().eval(0.0), 200.001);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("sin rho").is_err());
        assert!(Expr::parse("2 +").is_err());
        assert!(Expr::parse("tau").is_err());
        assert!(Expr::parse("sin(rho) extra").is_err());
        assert!(Expr::parse("exp(rho)").is_err());
    }
}
