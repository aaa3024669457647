use alloc::string::String;
use core::fmt::Write;

use num_traits::{One, Signed};

use super::poly::{Monomial, Poly, Rational};
use super::rational::RationalExpr;
use super::symbols::Symbols;

fn write_monomial(out: &mut String, m: &Monomial, symbols: &Symbols) {
    for (i, &(v, e)) in m.factors().iter().enumerate() {
        if i > 0 {
            out.push('*');
        }
        out.push_str(symbols.name(v));
        if e > 1 {
            let _ = write!(out, "^{e}");
        }
    }
}

fn write_magnitude(out: &mut String, c: &Rational, m: &Monomial, symbols: &Symbols) {
    let mag = c.abs();
    if m.is_one() {
        let _ = write!(out, "{mag}");
    } else if mag.is_one() {
        write_monomial(out, m, symbols);
    } else {
        let _ = write!(out, "{mag}*");
        write_monomial(out, m, symbols);
    }
}

/// Terms in descending monomial order, e.g. `y^2*x_dot^2 - 2*y*x_dot*z_dot`.
pub(crate) fn render_poly(p: &Poly, symbols: &Symbols) -> String {
    let mut out = String::new();
    if p.is_zero() {
        out.push('0');
        return out;
    }
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        write_magnitude(&mut out, c, m, symbols);
    }
    out
}

pub(crate) fn render(e: &RationalExpr, symbols: &Symbols) -> String {
    let num = render_poly(e.numer(), symbols);
    if e.is_polynomial() {
        return num;
    }
    let mut out = String::new();
    if e.numer().len() > 1 {
        let _ = write!(out, "({num})");
    } else {
        out.push_str(&num);
    }
    out.push('/');
    let den = render_poly(e.denom(), symbols);
    let bare = matches!(e.denom().as_term(), Some((m, c)) if c.is_one() && m.factors().len() == 1);
    if bare {
        out.push_str(&den);
    } else {
        let _ = write!(out, "({den})");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::symbols::SymbolKind;
    use super::*;

    #[test]
    fn renders_and_reparses() {
        let mut s = Symbols::new();
        for n in ["x", "y", "p_x", "p_y"] {
            s.add(n, SymbolKind::Coordinate).unwrap();
        }
        for text in ["p_x^2/(2*y^2) + p_y^2/(2*x^2)", "-x/y", "(x - y)/(x + y)", "-1/2*x^3 + 7", "x/y^2"] {
            let e = s.parse(text).unwrap();
            let printed = s.display(&e);
            let again = s.parse(&printed).unwrap();
            assert_eq!(e, again, "{text} -> {printed}");
            assert_eq!(printed, s.display(&again));
        }
        assert_eq!(s.display(&s.parse("x/y^2").unwrap()), "x/y^2");
        assert_eq!(s.display(&s.parse("0.5*x^2 - y").unwrap()), "1/2*x^2 - y");
    }
}
