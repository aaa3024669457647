use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::ZeroStatus;
use crate::symexpr::{ExprError, Poly, RationalExpr, Symbols, Var};

/// Membership tolerance for equality conditions.
pub const TAU_EQ: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn holds(self, value: f64) -> bool {
        match self {
            Sign::Positive => value > 0.0,
            Sign::Negative => value < 0.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Positive => ">0",
            Sign::Negative => "<0",
        }
    }
}

/// Semialgebraic piece: `equalities = 0`, `nonvanishing != 0`, signed conditions.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Stratum {
    pub name: String,
    pub equalities: Vec<RationalExpr>,
    pub nonvanishing: Vec<RationalExpr>,
    pub signs: Vec<(RationalExpr, Sign)>,
}

impl Stratum {
    pub fn new(name: impl Into<String>) -> Self {
        Stratum { name: name.into(), ..Default::default() }
    }

    pub fn equal_zero(mut self, e: RationalExpr) -> Self {
        self.equalities.push(e);
        self
    }

    pub fn nonzero(mut self, e: RationalExpr) -> Self {
        self.nonvanishing.push(e);
        self
    }

    pub fn signed(mut self, e: RationalExpr, s: Sign) -> Self {
        self.signs.push((e, s));
        self
    }

    /// Conditions of `self` and `other` together, under `self`'s name.
    pub fn intersect(&self, other: &Stratum) -> Stratum {
        let mut s = self.clone();
        s.equalities.extend(other.equalities.iter().cloned());
        s.nonvanishing.extend(other.nonvanishing.iter().cloned());
        s.signs.extend(other.signs.iter().cloned());
        s
    }

    pub fn is_unconstrained(&self) -> bool {
        self.equalities.is_empty() && self.nonvanishing.is_empty() && self.signs.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for e in self.equalities.iter().chain(&self.nonvanishing).chain(self.signs.iter().map(|(e, _)| e)) {
            out.extend(e.vars());
        }
        out
    }

    /// Numeric membership: equalities within `tau_eq`, other conditions strict.
    pub fn contains(&self, symbols: &Symbols, point: &BTreeMap<Var, f64>, tau_eq: f64) -> Result<bool, ExprError> {
        for e in &self.equalities {
            if symbols.eval(e, point)?.abs() > tau_eq {
                return Ok(false);
            }
        }
        for e in &self.nonvanishing {
            if symbols.eval(e, point)? == 0.0 {
                return Ok(false);
            }
        }
        for (e, s) in &self.signs {
            if !s.holds(symbols.eval(e, point)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Symbols forced nonzero: every variable of a monomial nonvanishing or
    /// sign condition.
    pub fn nonzero_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for e in self.nonvanishing.iter().chain(self.signs.iter().map(|(e, _)| e)) {
            if let Some((_, n, d)) = e.as_monomial_ratio() {
                out.extend(n.factors().iter().map(|&(v, _)| v));
                out.extend(d.factors().iter().map(|&(v, _)| v));
            }
        }
        out
    }

    /// Zero status of an expression already reduced modulo the equalities.
    /// Nonzero is certified for constants, monomials in forced-nonzero
    /// symbols, and products of those with declared nonvanishing factors.
    pub fn certify(&self, symbols: &Symbols, reduced: &RationalExpr) -> ZeroStatus {
        if symbols.is_zero(reduced) {
            return ZeroStatus::Zero;
        }
        let nz = self.nonzero_vars();
        let mut num = symbols.reduce_poly(reduced.numer());
        let factors: Vec<Poly> = self
            .nonvanishing
            .iter()
            .chain(self.signs.iter().map(|(e, _)| e))
            .map(|e| e.numer().clone())
            .filter(|p| p.len() > 1)
            .collect();
        let mut progress = true;
        while progress && num.len() > 1 {
            progress = false;
            for f in &factors {
                if let Some(q) = num.div_exact(f) {
                    num = q;
                    progress = true;
                }
            }
        }
        match num.as_term() {
            Some((m, _)) if m.factors().iter().all(|(v, _)| nz.contains(v)) => ZeroStatus::NonZero,
            _ => ZeroStatus::Unknown,
        }
    }

    /// Splits monomial nonvanishing conditions into sign pieces, one piece
    /// per sign pattern of the symbols involved. Non-monomial conditions are
    /// kept whole.
    pub fn sign_pieces(&self, symbols: &Symbols) -> Vec<Stratum> {
        let signed: BTreeSet<Var> = self
            .signs
            .iter()
            .filter_map(|(e, _)| e.as_monomial_ratio())
            .filter(|(_, n, d)| n.factors().len() == 1 && d.is_one())
            .map(|(_, n, _)| n.factors()[0].0)
            .collect();
        let mut split: Vec<Var> = Vec::new();
        let mut kept: Vec<RationalExpr> = Vec::new();
        for e in &self.nonvanishing {
            match e.as_monomial_ratio() {
                Some((_, n, d)) => {
                    for &(v, _) in n.factors().iter().chain(d.factors()) {
                        if !signed.contains(&v) && !split.contains(&v) {
                            split.push(v);
                        }
                    }
                }
                None => kept.push(e.clone()),
            }
        }
        split.sort();
        if split.is_empty() {
            return alloc::vec![self.clone()];
        }
        let mut out = Vec::new();
        for mask in 0u32..(1 << split.len()) {
            let mut piece = Stratum::new(String::new());
            piece.equalities = self.equalities.clone();
            piece.nonvanishing = kept.clone();
            piece.signs = self.signs.clone();
            let mut label = Vec::new();
            for (i, &v) in split.iter().enumerate() {
                let s = if mask & (1 << i) == 0 { Sign::Positive } else { Sign::Negative };
                piece.signs.push((RationalExpr::var(v), s));
                label.push(format!("{}{}", symbols.name(v), s.symbol()));
            }
            piece.name = format!("{}[{}]", self.name, label.join(","));
            out.push(piece);
        }
        out
    }

    pub fn describe(&self, symbols: &Symbols) -> String {
        let mut parts: Vec<String> = Vec::new();
        parts.extend(self.equalities.iter().map(|e| format!("{} = 0", symbols.display(e))));
        parts.extend(self.nonvanishing.iter().map(|e| format!("{} != 0", symbols.display(e))));
        parts.extend(self.signs.iter().map(|(e, s)| format!("{} {} 0", symbols.display(e), &s.symbol()[..1])));
        if parts.is_empty() {
            return String::from("everywhere");
        }
        parts.join(", ")
    }
}

/// A list of strata with attached data.
#[derive(Clone, Debug, Default)]
pub struct StratifiedSet<T> {
    pub pieces: Vec<(Stratum, T)>,
}

impl<T> StratifiedSet<T> {
    pub fn new() -> Self {
        StratifiedSet { pieces: Vec::new() }
    }

    pub fn push(&mut self, s: Stratum, data: T) {
        self.pieces.push((s, data));
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Stratum, T)> {
        self.pieces.iter()
    }

    pub fn get(&self, name: &str) -> Option<&(Stratum, T)> {
        self.pieces.iter().find(|(s, _)| s.name == name)
    }

    /// First stratum containing the point.
    pub fn locate(&self, symbols: &Symbols, point: &BTreeMap<Var, f64>, tau_eq: f64) -> Option<&(Stratum, T)> {
        self.pieces.iter().find(|(s, _)| s.contains(symbols, point, tau_eq).unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::SymbolKind;

    #[test]
    fn sign_pieces_of_a_product() {
        let mut s = Symbols::new();
        s.add("x", SymbolKind::Coordinate).unwrap();
        s.add("y", SymbolKind::Coordinate).unwrap();
        let open = Stratum::new("open").nonzero(s.parse("x*y").unwrap());
        let pieces = open.sign_pieces(&s);
        assert_eq!(pieces.len(), 4);
        assert_eq!(pieces[0].name, "open[x>0,y>0]");
        let axis = Stratum::new("axis").equal_zero(s.parse("x").unwrap()).nonzero(s.parse("y").unwrap());
        assert_eq!(axis.sign_pieces(&s).len(), 2);
        let origin = Stratum::new("o").equal_zero(s.parse("x").unwrap());
        assert_eq!(origin.sign_pieces(&s).len(), 1);
    }

    #[test]
    fn certification() {
        let mut s = Symbols::new();
        s.add("x", SymbolKind::Coordinate).unwrap();
        s.add("y", SymbolKind::Coordinate).unwrap();
        let st = Stratum::new("a").nonzero(s.parse("x").unwrap()).nonzero(s.parse("x + y").unwrap());
        assert_eq!(st.certify(&s, &s.parse("3*x^2").unwrap()), ZeroStatus::NonZero);
        assert_eq!(st.certify(&s, &s.parse("x*y").unwrap()), ZeroStatus::Unknown);
        assert_eq!(st.certify(&s, &s.parse("x^2 + x*y").unwrap()), ZeroStatus::NonZero);
        assert_eq!(st.certify(&s, &s.parse("0").unwrap()), ZeroStatus::Zero);
    }

    #[test]
    fn numeric_membership() {
        let mut s = Symbols::new();
        let x = s.add("x", SymbolKind::Coordinate).unwrap();
        let st = Stratum::new("p").signed(s.parse("x").unwrap(), Sign::Positive);
        let mut pt = BTreeMap::new();
        pt.insert(x, 0.5);
        assert!(st.contains(&s, &pt, TAU_EQ).unwrap());
        pt.insert(x, -0.5);
        assert!(!st.contains(&s, &pt, TAU_EQ).unwrap());
    }
}
