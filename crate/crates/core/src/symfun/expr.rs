//! Text form of curvature functions.
//!
//! ```text
//! function := "mean" | "mean(" r ")" | "power(" r ")" | "gauss" | "esym(" k ")"
//!           | "product(" factor ("," factor)* ")"
//! factor   := function "^" weight
//! ```
//!
//! e.g. `product(gauss^0.5, mean^0.5)`.

use thiserror::Error;

use super::CurvatureFn;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("column {column}: {message}")]
pub struct ExprError {
    /// 1-based column in the expression text.
    pub column: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<R>(&self, message: impl Into<String>) -> Result<R, ExprError> {
        Err(ExprError {
            column: self.pos + 1,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn ident(&mut self) -> Result<&'a str, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a function name");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii"))
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || b".eE+-".contains(&self.src[self.pos]))
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.err(format!("expected a number, found '{text}'"))
            }
        }
    }

    fn function<T: Real>(&mut self) -> Result<CurvatureFn<T>, ExprError> {
        self.skip_ws();
        let start = self.pos;
        let name = self.ident()?;
        match name {
            "mean" => {
                if self.eat(b'(') {
                    let r = self.number()?;
                    self.expect(b')')?;
                    Ok(CurvatureFn::PowerMean { r: T::lit(r) })
                } else {
                    Ok(CurvatureFn::PowerMean { r: T::one() })
                }
            }
            "power" => {
                self.expect(b'(')?;
                let r = self.number()?;
                self.expect(b')')?;
                Ok(CurvatureFn::PowerMean { r: T::lit(r) })
            }
            "gauss" => Ok(CurvatureFn::GaussPower),
            "esym" => {
                self.expect(b'(')?;
                let k = self.number()?;
                if k.fract() != 0.0 || k < 1.0 {
                    return self.err("esym order must be a positive integer");
                }
                self.expect(b')')?;
                Ok(CurvatureFn::ElemSymRoot { k: k as usize })
            }
            "product" => {
                self.expect(b'(')?;
                let mut parts = Vec::new();
                loop {
                    let f = self.function::<T>()?;
                    self.expect(b'^')?;
                    let w = self.number()?;
                    parts.push((f, T::lit(w)));
                    if !self.eat(b',') {
                        break;
                    }
                }
                self.expect(b')')?;
                Ok(CurvatureFn::WeightedProduct(parts))
            }
            other => {
                self.pos = start;
                self.err(format!("unknown curvature function '{other}'"))
            }
        }
    }
}

/// Parses the text form. Structural validity (weights summing to one,
/// `k ≤ n`) is checked separately by `CurvatureSpec::new`.
pub fn parse_function<T: Real>(text: &str) -> Result<CurvatureFn<T>, ExprError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let f = p.function()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

pub fn format_function<T: Real>(f: &CurvatureFn<T>) -> String {
    match f {
        CurvatureFn::PowerMean { r } if *r == T::one() => "mean".into(),
        CurvatureFn::PowerMean { r } => format!("power({r})"),
        CurvatureFn::GaussPower => "gauss".into(),
        CurvatureFn::ElemSymRoot { k } => format!("esym({k})"),
        CurvatureFn::WeightedProduct(parts) => {
            let inner: Vec<String> = parts
                .iter()
                .map(|(f, w)| format!("{}^{}", format_function(f), w))
                .collect();
            format!("product({})", inner.join(", "))
        }
    }
}
