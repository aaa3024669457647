use alloc::string::{String, ToString};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::Rational;
use super::rational::RationalExpr;
use super::symbols::Symbols;
use super::ExprError;

// expr   := term (('+' | '-') term)*
// term   := unary (('*' | '/') unary)*
// unary  := ('+' | '-') unary | power
// power  := atom ('^' ['-'] integer)?
// atom   := number | identifier | '(' expr ')'

pub(crate) fn parse(text: &str, symbols: &Symbols) -> Result<RationalExpr, ExprError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, symbols };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    symbols: &'a Symbols,
}

enum Atom {
    Symbol(RationalExpr),
    Other(RationalExpr),
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ExprError {
        ExprError::Syntax { pos: self.pos, msg: msg.to_string() }
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

    fn expr(&mut self) -> Result<RationalExpr, ExprError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RationalExpr, ExprError> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if c == b'*' {
                &acc * &rhs
            } else {
                if self.symbols.is_zero(&rhs) {
                    return Err(ExprError::ZeroDenominator);
                }
                acc.try_div(&rhs)?
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RationalExpr, ExprError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RationalExpr, ExprError> {
        let atom = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(match atom {
                Atom::Symbol(e) | Atom::Other(e) => e,
            });
        }
        self.pos += 1;
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer exponent"));
        }
        let digits = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let e: u32 = digits.parse().map_err(|_| self.error("exponent too large"))?;
        match (atom, negative) {
            (Atom::Symbol(b), true) => b.pow(e).recip().map_err(|_| ExprError::ZeroDenominator),
            (Atom::Other(_), true) => Err(self.error("negative exponent only allowed on a single symbol")),
            (Atom::Symbol(b) | Atom::Other(b), false) => Ok(b.pow(e)),
        }
    }

    fn atom(&mut self) -> Result<Atom, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(Atom::Other(e))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Atom::Other(RationalExpr::constant(self.number()?))),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let v = self.symbols.lookup(name)?;
                Ok(Atom::Symbol(RationalExpr::var(v)))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    /// Decimal literal with optional fraction and exponent, read exactly.
    fn number(&mut self) -> Result<Rational, ExprError> {
        let mut digits = String::new();
        let mut frac_len: i64 = 0;
        let mut seen_dot = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                digits.push(c as char);
                if seen_dot {
                    frac_len += 1;
                }
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            return Err(self.error("malformed number"));
        }
        let mut exp: i64 = 0;
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            let sign = match self.src.get(self.pos) {
                Some(b'-') => {
                    self.pos += 1;
                    -1
                }
                Some(b'+') => {
                    self.pos += 1;
                    1
                }
                _ => 1,
            };
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                self.pos = save;
                return Err(self.error("malformed exponent"));
            }
            let s = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            exp = sign * s.parse::<i64>().map_err(|_| self.error("exponent too large"))?;
        }
        let mantissa: BigInt = digits.parse().map_err(|_| self.error("malformed number"))?;
        let shift = exp - frac_len;
        if shift.unsigned_abs() > 10_000 {
            return Err(self.error("exponent too large"));
        }
        let ten = BigInt::from(10);
        let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
        let r = if shift >= 0 {
            Rational::from_integer(mantissa * scale)
        } else {
            Rational::new(mantissa, scale)
        };
        debug_assert!(!(r.is_zero() && !r.numer().is_zero()) || r.denom().is_one());
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::super::symbols::SymbolKind;
    use super::*;

    fn table() -> Symbols {
        let mut s = Symbols::new();
        for n in ["x", "y", "z"] {
            s.add(n, SymbolKind::Coordinate).unwrap();
        }
        s
    }

    #[test]
    fn decimals_are_exact() {
        let s = table();
        assert_eq!(s.parse("0.5").unwrap(), RationalExpr::ratio(1, 2));
        assert_eq!(s.parse("1.25e1").unwrap(), RationalExpr::ratio(25, 2));
        assert_eq!(s.parse("3e-2").unwrap(), RationalExpr::ratio(3, 100));
    }

    #[test]
    fn precedence_and_unary_minus() {
        let s = table();
        let a = s.parse("-x^2 + 2*y/4").unwrap();
        let b = s.parse("y/2 - x*x").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_exponent_rules() {
        let s = table();
        assert_eq!(s.parse("x^-2").unwrap(), s.parse("1/(x*x)").unwrap());
        assert!(matches!(s.parse("(x+y)^-1"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn errors() {
        let s = table();
        assert_eq!(s.parse("w"), Err(ExprError::UnknownIdentifier("w".into())));
        assert!(matches!(s.parse("x +"), Err(ExprError::Syntax { .. })));
        assert!(matches!(s.parse("(x"), Err(ExprError::Syntax { .. })));
        assert_eq!(s.parse("1/(x - x)"), Err(ExprError::ZeroDenominator));
    }
}
