use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::One;

use super::poly::{Monomial, Poly, Rational, Var};
use super::rational::RationalExpr;
use super::ExprError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SymbolKind {
    Coordinate,
    Velocity,
    Momentum,
    /// Second time derivative of a coordinate; only appears in Euler-Lagrange residuals.
    Acceleration,
    Parameter,
    Algebraic,
}

#[derive(Clone, Debug)]
pub struct SymbolInfo {
    pub name: String,
    pub kind: SymbolKind,
    /// For algebraic parameters `r`: the relation `r^d = tail(r)`, stored as
    /// the degree `d` and the tail polynomial (degree < d, in `r` only).
    relation: Option<(u32, Poly)>,
}

/// Ordered symbol table. Declaration order fixes the monomial order.
#[derive(Clone, Debug, Default)]
pub struct Symbols {
    infos: Vec<SymbolInfo>,
    index: BTreeMap<String, Var>,
}

pub fn velocity_name(q: &str) -> String {
    alloc::format!("{q}_dot")
}

pub fn acceleration_name(q: &str) -> String {
    alloc::format!("{q}_ddot")
}

pub fn momentum_name(q: &str) -> String {
    alloc::format!("p_{q}")
}

fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Symbols {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.infos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infos.is_empty()
    }

    pub fn add(&mut self, name: &str, kind: SymbolKind) -> Result<Var, ExprError> {
        if !valid_identifier(name) {
            return Err(ExprError::InvalidName(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(ExprError::DuplicateSymbol(name.to_string()));
        }
        let v = Var(self.infos.len() as u32);
        self.infos.push(SymbolInfo { name: name.to_string(), kind, relation: None });
        self.index.insert(name.to_string(), v);
        Ok(v)
    }

    /// Declares an algebraic parameter with a univariate defining relation,
    /// e.g. `add_algebraic("r", "r^2 - 2")`. The relation is made monic.
    pub fn add_algebraic(&mut self, name: &str, relation: &str) -> Result<Var, ExprError> {
        let v = self.add(name, SymbolKind::Algebraic)?;
        let rel = match self.parse(relation) {
            Ok(r) => r,
            Err(e) => {
                self.pop();
                return Err(e);
            }
        };
        let p = rel.numer();
        let d = p.degree_in(v);
        if !rel.is_polynomial() || d == 0 || p.vars().iter().any(|&w| w != v) {
            self.pop();
            return Err(ExprError::BadRelation(name.to_string()));
        }
        let lead = p.coefficient_of(v, d).constant_value().expect("univariate");
        let monic = p.scale(&lead.recip());
        let tail = monic.sub(&Poly::term(Monomial::power(v, d), Rational::one())).neg();
        self.infos[v.index()].relation = Some((d, tail));
        Ok(v)
    }

    fn pop(&mut self) {
        if let Some(info) = self.infos.pop() {
            self.index.remove(&info.name);
        }
    }

    pub fn get(&self, name: &str) -> Option<Var> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<Var, ExprError> {
        self.get(name).ok_or_else(|| ExprError::UnknownIdentifier(name.to_string()))
    }

    pub fn name(&self, v: Var) -> &str {
        &self.infos[v.index()].name
    }

    pub fn kind(&self, v: Var) -> SymbolKind {
        self.infos[v.index()].kind
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.infos.len() as u32).map(Var)
    }

    pub fn of_kind(&self, kind: SymbolKind) -> Vec<Var> {
        self.vars().filter(|&v| self.kind(v) == kind).collect()
    }

    pub fn has_algebraic(&self) -> bool {
        self.infos.iter().any(|i| i.relation.is_some())
    }

    /// Residual of the defining relation at `value`, for root-consistency checks.
    pub fn relation_residual(&self, v: Var, value: f64) -> Option<f64> {
        let (d, tail) = self.infos[v.index()].relation.as_ref()?;
        let lhs = super::poly::powi(value, *d);
        Some(lhs - tail.eval_f64(&|_| value))
    }

    /// Largest real root of an algebraic parameter's relation.
    pub fn algebraic_root(&self, v: Var) -> Option<f64> {
        let (d, tail) = self.infos[v.index()].relation.as_ref()?;
        let f = |x: f64| super::poly::powi(x, *d) - tail.eval_f64(&|_| x);
        // Cauchy bound on the roots of the monic relation
        let bound = 1.0 + tail.terms().map(|(_, c)| super::poly::rational_to_f64(c).abs()).fold(0.0, f64::max);
        let steps = 4096;
        let h = 2.0 * bound / steps as f64;
        for i in (0..steps).rev() {
            let (mut a, mut b) = (-bound + i as f64 * h, -bound + (i + 1) as f64 * h);
            let (fa, fb) = (f(a), f(b));
            if fb == 0.0 {
                return Some(b);
            }
            if fa * fb < 0.0 {
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if f(a) * f(m) <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                return Some(0.5 * (a + b));
            }
        }
        None
    }

    /// Binds every algebraic parameter to its largest real root.
    pub fn bind_algebraic(&self, point: &mut BTreeMap<Var, f64>) {
        for v in self.of_kind(SymbolKind::Algebraic) {
            if !point.contains_key(&v) {
                if let Some(r) = self.algebraic_root(v) {
                    point.insert(v, r);
                }
            }
        }
    }

    /// Reduces powers of algebraic parameters modulo their relations.
    pub fn reduce_poly(&self, p: &Poly) -> Poly {
        if !self.has_algebraic() {
            return p.clone();
        }
        let mut current = p.clone();
        loop {
            let mut changed = false;
            let mut out = Poly::zero();
            for (m, c) in current.terms() {
                let hit = m.factors().iter().find_map(|&(v, e)| match &self.infos[v.index()].relation {
                    Some((d, tail)) if e >= *d => Some((v, e, *d, tail)),
                    _ => None,
                });
                match hit {
                    Some((v, e, d, tail)) => {
                        changed = true;
                        let rest = m.with_exponent(v, e - d);
                        out = out.add(&tail.mul_monomial(&rest).scale(c));
                    }
                    None => out.add_term(m.clone(), c.clone()),
                }
            }
            current = out;
            if !changed {
                return current;
            }
        }
    }

    /// Canonical representative with algebraic relations applied.
    pub fn canonical(&self, e: &RationalExpr) -> RationalExpr {
        if !self.has_algebraic() {
            return e.clone();
        }
        e.map_polys(|p| self.reduce_poly(p)).unwrap_or_else(|_| e.clone())
    }

    pub fn is_zero(&self, e: &RationalExpr) -> bool {
        self.reduce_poly(e.numer()).is_zero()
    }

    pub fn equal(&self, a: &RationalExpr, b: &RationalExpr) -> bool {
        self.is_zero(&(a - b))
    }

    /// Exact field operation with canonicalization.
    pub fn arith(&self, op: ArithOp, a: &RationalExpr, b: &RationalExpr) -> Result<RationalExpr, ExprError> {
        let r = match op {
            ArithOp::Add => a + b,
            ArithOp::Sub => a - b,
            ArithOp::Mul => a * b,
            ArithOp::Div => {
                if self.is_zero(b) {
                    return Err(ExprError::DivisionByZero);
                }
                a.try_div(&self.canonical(b))?
            }
        };
        Ok(self.canonical(&r))
    }

    /// Partial derivative; algebraic parameters are constants and cannot be
    /// differentiated against.
    pub fn differentiate(&self, e: &RationalExpr, v: Var) -> Result<RationalExpr, ExprError> {
        if self.kind(v) == SymbolKind::Algebraic {
            return Err(ExprError::DifferentiateAlgebraic(self.name(v).to_string()));
        }
        Ok(self.canonical(&e.derivative(v)))
    }

    pub fn substitute(&self, e: &RationalExpr, bindings: &BTreeMap<Var, RationalExpr>) -> Result<RationalExpr, ExprError> {
        let singular = || ExprError::SingularDenominator(self.display_poly(e.denom()));
        let r = e.substitute(bindings).map_err(|err| match err {
            ExprError::SubstitutionSingular => singular(),
            other => other,
        })?;
        if self.has_algebraic() && self.reduce_poly(r.denom()).is_zero() {
            return Err(singular());
        }
        Ok(self.canonical(&r))
    }

    /// Numeric evaluation with every free symbol bound in `point`.
    pub fn eval(&self, e: &RationalExpr, point: &BTreeMap<Var, f64>) -> Result<f64, ExprError> {
        for v in e.vars() {
            let Some(&value) = point.get(&v) else {
                return Err(ExprError::UnboundSymbol { index: v.index() });
            };
            if let Some(res) = self.relation_residual(v, value) {
                if res.abs() > 1e-9 * (1.0 + value.abs()) {
                    return Err(ExprError::InconsistentRoot(self.name(v).to_string()));
                }
            }
        }
        e.eval_at(point)
    }

    /// Same as [`Symbols::eval`], keyed by symbol name.
    pub fn eval_named(&self, e: &RationalExpr, point: &[(&str, f64)]) -> Result<f64, ExprError> {
        let mut map = BTreeMap::new();
        for &(name, value) in point {
            map.insert(self.lookup(name)?, value);
        }
        self.eval(e, &map)
    }

    pub fn parse(&self, text: &str) -> Result<RationalExpr, ExprError> {
        let e = super::parse::parse(text, self)?;
        let c = self.canonical(&e);
        if self.reduce_poly(c.denom()).is_zero() {
            return Err(ExprError::ZeroDenominator);
        }
        Ok(c)
    }

    pub fn display(&self, e: &RationalExpr) -> String {
        super::display::render(&self.canonical(e), self)
    }

    pub fn display_poly(&self, p: &Poly) -> String {
        super::display::render_poly(p, self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}
