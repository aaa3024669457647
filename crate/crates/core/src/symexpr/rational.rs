use alloc::collections::BTreeMap;
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::poly::{is_negative, Monomial, Poly, Rational, Var};
use super::ExprError;

/// Quotient of two polynomials.
///
/// Normal form: the denominator is nonzero, has a positive leading
/// coefficient and coprime integer coefficients, and shares no monomial
/// factor with the numerator. Common non-monomial factors are removed only
/// when one side divides the other exactly, so two equal expressions may
/// have different representations; equality is decided by cross
/// multiplication.
#[derive(Clone, Debug)]
pub struct RationalExpr {
    num: Poly,
    den: Poly,
}

impl RationalExpr {
    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn int(i: i64) -> Self {
        Self::constant(super::poly::rational_from_int(i))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::constant(Rational::new(n.into(), d.into()))
    }

    pub fn var(v: Var) -> Self {
        Self::from_poly(Poly::var(v))
    }

    pub fn from_poly(p: Poly) -> Self {
        RationalExpr { num: p, den: Poly::one() }
    }

    pub fn new(num: Poly, den: Poly) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::ZeroDenominator);
        }
        Ok(Self::normalized(num, den))
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.num.contains_var(v) || self.den.contains_var(v)
    }

    pub fn vars(&self) -> alloc::collections::BTreeSet<Var> {
        let mut s = self.num.vars();
        s.extend(self.den.vars());
        s
    }

    fn normalized(num: Poly, den: Poly) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return Self::zero();
        }
        let (mut num, mut den) = (num, den);

        let g = num.monomial_content().gcd(&den.monomial_content());
        if !g.is_one() {
            num = num.div_monomial(&g).expect("gcd divides");
            den = den.div_monomial(&g).expect("gcd divides");
        }

        if let Some(c) = den.constant_value() {
            return RationalExpr { num: num.scale(&c.recip()), den: Poly::one() };
        }
        if let Some(q) = num.div_exact(&den) {
            return RationalExpr { num: q, den: Poly::one() };
        }
        if !num.is_constant() && num.len() <= den.len() {
            if let Some(q) = den.div_exact(&num) {
                num = Poly::one();
                den = q;
                if let Some(c) = den.constant_value() {
                    return RationalExpr { num: num.scale(&c.recip()), den: Poly::one() };
                }
            }
        }

        let mut scale = den.rational_content();
        if is_negative(den.leading().expect("nonzero").1) {
            scale = -scale;
        }
        let inv = scale.recip();
        RationalExpr { num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn try_div(&self, other: &RationalExpr) -> Result<RationalExpr, ExprError> {
        if other.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Self::normalized(self.num.mul(&other.den), self.den.mul(&other.num)))
    }

    pub fn recip(&self) -> Result<RationalExpr, ExprError> {
        Self::one().try_div(self)
    }

    pub fn pow(&self, e: u32) -> RationalExpr {
        RationalExpr { num: self.num.pow(e), den: self.den.pow(e) }
    }

    pub fn powi(&self, e: i32) -> Result<RationalExpr, ExprError> {
        if e >= 0 {
            Ok(self.pow(e as u32))
        } else {
            self.pow(e.unsigned_abs()).recip()
        }
    }

    pub fn scale(&self, c: &Rational) -> RationalExpr {
        if c.is_zero() {
            return Self::zero();
        }
        RationalExpr { num: self.num.scale(c), den: self.den.clone() }
    }

    /// Partial derivative by the quotient rule.
    pub fn derivative(&self, v: Var) -> RationalExpr {
        if !self.den.contains_var(v) {
            return RationalExpr { num: self.num.derivative(v), den: self.den.clone() };
        }
        let n = self.num.derivative(v).mul(&self.den).sub(&self.num.mul(&self.den.derivative(v)));
        Self::normalized(n, self.den.mul(&self.den))
    }

    /// Simultaneous substitution: every bound symbol is replaced by its
    /// binding in one pass, so bindings may mention each other freely.
    pub fn substitute(&self, bindings: &BTreeMap<Var, RationalExpr>) -> Result<RationalExpr, ExprError> {
        if bindings.is_empty() || self.vars().iter().all(|v| !bindings.contains_key(v)) {
            return Ok(self.clone());
        }
        let mut cache = PowerCache::default();
        let num = substitute_poly(&self.num, bindings, &mut cache);
        let den = substitute_poly(&self.den, bindings, &mut cache);
        if den.is_zero() {
            return Err(ExprError::SubstitutionSingular);
        }
        num.try_div(&den).map_err(|_| ExprError::SubstitutionSingular)
    }

    pub fn substitute_one(&self, v: Var, value: &RationalExpr) -> Result<RationalExpr, ExprError> {
        let mut b = BTreeMap::new();
        b.insert(v, value.clone());
        self.substitute(&b)
    }

    /// Numeric value; `value` supplies the double for each symbol.
    pub fn eval_with(&self, value: &impl Fn(Var) -> f64) -> Result<f64, ExprError> {
        let d = self.den.eval_f64(value);
        if !(d.abs() > 1e-300) {
            return Err(ExprError::Singular);
        }
        Ok(self.num.eval_f64(value) / d)
    }

    /// Numeric value at a point given as a symbol map.
    pub fn eval_at(&self, point: &BTreeMap<Var, f64>) -> Result<f64, ExprError> {
        for v in self.vars() {
            if !point.contains_key(&v) {
                return Err(ExprError::UnboundSymbol { index: v.index() });
            }
        }
        self.eval_with(&|v| point[&v])
    }

    /// Cheap exact check `self == c * m` for a nonzero constant and a
    /// monomial `m` (possibly 1), with a monomial denominator.
    pub fn as_monomial_ratio(&self) -> Option<(Rational, Monomial, Monomial)> {
        let (nm, nc) = self.num.as_term()?;
        let (dm, dc) = self.den.as_term()?;
        Some((nc / dc, nm.clone(), dm.clone()))
    }

    pub(crate) fn map_polys(&self, f: impl Fn(&Poly) -> Poly) -> Result<RationalExpr, ExprError> {
        RationalExpr::new(f(&self.num), f(&self.den))
    }
}

#[derive(Default)]
struct PowerCache {
    powers: BTreeMap<(Var, u32), RationalExpr>,
}

impl PowerCache {
    fn get(&mut self, v: Var, e: u32, base: &RationalExpr) -> RationalExpr {
        self.powers.entry((v, e)).or_insert_with(|| base.pow(e)).clone()
    }
}

fn substitute_poly(p: &Poly, bindings: &BTreeMap<Var, RationalExpr>, cache: &mut PowerCache) -> RationalExpr {
    // Split each term into its unbound part (kept as a monomial) and the
    // product of bound powers; terms sharing the same bound part are grouped.
    let mut groups: BTreeMap<Monomial, Poly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let mut free = Monomial::one();
        let mut bound = Monomial::one();
        for &(v, e) in m.factors() {
            if bindings.contains_key(&v) {
                bound = bound.mul(&Monomial::power(v, e));
            } else {
                free = free.mul(&Monomial::power(v, e));
            }
        }
        groups.entry(bound).or_default().add_term(free, c.clone());
    }
    let mut acc = RationalExpr::zero();
    for (bound, free) in groups {
        let mut t = RationalExpr::from_poly(free);
        for &(v, e) in bound.factors() {
            t = &t * &cache.get(v, e, &bindings[&v]);
        }
        acc = &acc + &t;
    }
    acc
}

fn add_impl(a: &RationalExpr, b: &RationalExpr, negate_b: bool) -> RationalExpr {
    let bn = if negate_b { b.num.neg() } else { b.num.clone() };
    if a.is_zero() {
        return RationalExpr { num: bn, den: b.den.clone() };
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.den == b.den {
        return RationalExpr::normalized(a.num.add(&bn), a.den.clone());
    }
    if let (Some((am, ac)), Some((bm, bc))) = (a.den.as_term(), b.den.as_term()) {
        // monomial denominators: use their lcm instead of the product
        let l = am.lcm(bm);
        let fa = l.div(am).expect("lcm");
        let fb = l.div(bm).expect("lcm");
        let n = a.num.mul_monomial(&fa).scale(&ac.recip()).add(&bn.mul_monomial(&fb).scale(&bc.recip()));
        return RationalExpr::normalized(n, Poly::term(l, Rational::one()));
    }
    RationalExpr::normalized(a.num.mul(&b.den).add(&bn.mul(&a.den)), a.den.mul(&b.den))
}

impl<'a> Add<&'a RationalExpr> for &'a RationalExpr {
    type Output = RationalExpr;
    fn add(self, rhs: &RationalExpr) -> RationalExpr {
        add_impl(self, rhs, false)
    }
}

impl<'a> Sub<&'a RationalExpr> for &'a RationalExpr {
    type Output = RationalExpr;
    fn sub(self, rhs: &RationalExpr) -> RationalExpr {
        add_impl(self, rhs, true)
    }
}

impl<'a> Mul<&'a RationalExpr> for &'a RationalExpr {
    type Output = RationalExpr;
    fn mul(self, rhs: &RationalExpr) -> RationalExpr {
        if self.is_zero() || rhs.is_zero() {
            return RationalExpr::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RationalExpr::from_poly(self.num.mul(&rhs.num));
        }
        RationalExpr::normalized(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }
}

impl Neg for &RationalExpr {
    type Output = RationalExpr;
    fn neg(self) -> RationalExpr {
        RationalExpr { num: self.num.neg(), den: self.den.clone() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<RationalExpr> for RationalExpr {
            type Output = RationalExpr;
            fn $m(self, rhs: RationalExpr) -> RationalExpr {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a RationalExpr> for RationalExpr {
            type Output = RationalExpr;
            fn $m(self, rhs: &RationalExpr) -> RationalExpr {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<RationalExpr> for &'a RationalExpr {
            type Output = RationalExpr;
            fn $m(self, rhs: RationalExpr) -> RationalExpr {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for RationalExpr {
    type Output = RationalExpr;
    fn neg(self) -> RationalExpr {
        -&self
    }
}

/// Mathematical equality by cross multiplication. Algebraic-parameter
/// relations are not applied here; use `Symbols::equal` for that.
impl PartialEq for RationalExpr {
    fn eq(&self, other: &Self) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl Eq for RationalExpr {}

impl From<Poly> for RationalExpr {
    fn from(p: Poly) -> Self {
        Self::from_poly(p)
    }
}

impl From<i64> for RationalExpr {
    fn from(i: i64) -> Self {
        Self::int(i)
    }
}

impl Default for RationalExpr {
    fn default() -> Self {
        Self::zero()
    }
}

#[cfg(test)]
fn leading_coefficient_f64(p: &Poly) -> f64 {
    use super::poly::rational_to_f64;
    p.leading().map(|(_, c)| rational_to_f64(c)).unwrap_or(0.0)
}
