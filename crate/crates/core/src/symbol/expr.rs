//! Tiny expression language for coefficient entries: numbers, parameter
//! names, the imaginary unit `i`, `+ - * ^`, parentheses and `abs(...)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::C64;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Imag,
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Abs(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, vars: &[f64]) -> C64 {
        match self {
            Expr::Num(x) => C64::new(*x, 0.0),
            Expr::Imag => C64::new(0.0, 1.0),
            Expr::Var(k) => C64::new(vars[*k], 0.0),
            Expr::Neg(a) => -a.eval(vars),
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Pow(a, p) => {
                let z = a.eval(vars);
                if p.fract() == 0.0 && p.abs() < 64.0 {
                    z.powi(*p as i32)
                } else if z.im == 0.0 && z.re >= 0.0 {
                    C64::new(z.re.powf(*p), 0.0)
                } else {
                    z.powf(*p)
                }
            }
            Expr::Abs(a) => C64::new(a.eval(vars).norm(), 0.0),
        }
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> Display<'a> {
        Display { e: self, names }
    }
}

pub struct Display<'a> {
    e: &'a Expr,
    names: &'a [String],
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |e: &'_ Expr, min: u8, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            let d = Display { e, names: self.names };
            if prec(e) < min {
                write!(f, "({d})")
            } else {
                write!(f, "{d}")
            }
        };
        match self.e {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Imag => write!(f, "i"),
            Expr::Var(k) => write!(f, "{}", self.names[*k]),
            Expr::Neg(a) => {
                write!(f, "-")?;
                sub(a, 4, f)
            }
            Expr::Add(a, b) => {
                sub(a, 1, f)?;
                write!(f, " + ")?;
                sub(b, 2, f)
            }
            Expr::Sub(a, b) => {
                sub(a, 1, f)?;
                write!(f, " - ")?;
                sub(b, 2, f)
            }
            Expr::Mul(a, b) => {
                sub(a, 2, f)?;
                write!(f, "*")?;
                sub(b, 3, f)
            }
            Expr::Pow(a, p) => {
                sub(a, 5, f)?;
                if p.is_sign_negative() {
                    write!(f, "^({p:?})")
                } else {
                    write!(f, "^{p:?}")
                }
            }
            Expr::Abs(a) => write!(f, "abs({})", Display { e: a, names: self.names }),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    names: &'a [String],
}

pub fn parse(src: &str, names: &[String]) -> Result<Expr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, names };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
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

    fn eat(&mut self, ch: u8) -> bool {
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.eat(b'*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = if self.eat(b'(') {
                let neg = self.eat(b'-');
                let v = self.number()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                if neg {
                    -v
                } else {
                    v
                }
            } else {
                self.number()?
            };
            return Ok(Expr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let ch = self.src[self.pos];
            let exp_sign = (ch == b'-' || ch == b'+')
                && self.pos > start
                && matches!(self.src[self.pos - 1], b'e' | b'E');
            if ch.is_ascii_digit() || ch == b'.' || ch == b'e' || ch == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map_err(|_| Error::Parse { pos: start, msg: format!("bad number '{text}'") })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(ch) if ch.is_ascii_digit() || ch == b'.' => Ok(Expr::Num(self.number()?)),
            Some(ch) if ch.is_ascii_alphabetic() || ch == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                if word == "abs" {
                    if !self.eat(b'(') {
                        return Err(self.err("expected '(' after abs"));
                    }
                    let e = self.expr()?;
                    if !self.eat(b')') {
                        return Err(self.err("expected ')'"));
                    }
                    return Ok(Expr::Abs(Box::new(e)));
                }
                if let Some(k) = self.names.iter().position(|n| n == word) {
                    return Ok(Expr::Var(k));
                }
                if word == "i" {
                    return Ok(Expr::Imag);
                }
                Err(Error::Parse { pos: start, msg: format!("unknown name '{word}'") })
            }
            _ => Err(self.err("expected a number, name or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names() -> Vec<String> {
        vec!["x".into(), "a".into()]
    }

    #[test]
    fn evaluates_precedence() {
        let e = parse("1 + 2*x^2 - -a", &names()).unwrap();
        assert_eq!(e.eval(&[3.0, 0.5]), C64::new(19.5, 0.0));
        let e = parse("abs(x)^0.5*i", &names()).unwrap();
        assert!((e.eval(&[-4.0, 0.0]) - C64::new(0.0, 2.0)).norm() < 1e-15);
        let e = parse("x*(1 + a^2)", &names()).unwrap();
        assert_eq!(e.eval(&[2.0, 3.0]), C64::new(20.0, 0.0));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("1 +", &names()).is_err());
        assert!(parse("y", &names()).is_err());
        assert!(parse("(x", &names()).is_err());
        assert!(parse("x x", &names()).is_err());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Num),
            Just(Expr::Imag),
            (0usize..2).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), -3.0f64..3.0).prop_map(|(a, p)| Expr::Pow(Box::new(a), p)),
                inner.prop_map(|a| Expr::Abs(Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let n = names();
            let text = e.display(&n).to_string();
            let back = parse(&text, &n).unwrap();
            prop_assert_eq!(back.display(&n).to_string(), text);
        }
    }
}
