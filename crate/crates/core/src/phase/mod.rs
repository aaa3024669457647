//! Canonical brackets, Hamiltonian vector fields and weak reduction.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::legendre::stratum::Stratum;
use crate::linalg::{Domain, ZeroStatus};
use crate::symexpr::{momentum_name, ExprError, RationalExpr, SymbolKind, Symbols, Var};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PhaseError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("symbol `{0}` is not a phase-space symbol or parameter")]
    ForeignSymbol(String),
    #[error("coordinate and momentum lists differ in length")]
    Shape,
    #[error("no symbol can be solved for in equality {0}")]
    Unsolvable(String),
    #[error("substitution graph solves `{0}` twice")]
    DuplicateSolve(String),
}

/// Cotangent bundle coordinates `(q, p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseSpace {
    coords: Vec<Var>,
    momenta: Vec<Var>,
}

impl PhaseSpace {
    pub fn new(coords: Vec<Var>, momenta: Vec<Var>) -> Result<Self, PhaseError> {
        if coords.len() != momenta.len() {
            return Err(PhaseError::Shape);
        }
        Ok(PhaseSpace { coords, momenta })
    }

    /// Pairs each coordinate `q` with the declared momentum `p_q`.
    pub fn from_coordinates(symbols: &Symbols, coords: &[Var]) -> Result<Self, PhaseError> {
        let momenta = coords
            .iter()
            .map(|&q| symbols.lookup(&momentum_name(symbols.name(q))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(coords.to_vec(), momenta)
    }

    pub fn coordinates(&self) -> &[Var] {
        &self.coords
    }

    pub fn momenta(&self) -> &[Var] {
        &self.momenta
    }

    pub fn dof(&self) -> usize {
        self.coords.len()
    }

    /// `(q^1..q^n, p_1..p_n)`.
    pub fn vars(&self) -> Vec<Var> {
        self.coords.iter().chain(&self.momenta).copied().collect()
    }

    pub fn check(&self, e: &RationalExpr, symbols: &Symbols) -> Result<(), PhaseError> {
        for v in e.vars() {
            let ok = self.coords.contains(&v)
                || self.momenta.contains(&v)
                || matches!(symbols.kind(v), SymbolKind::Parameter | SymbolKind::Algebraic);
            if !ok {
                return Err(PhaseError::ForeignSymbol(symbols.name(v).to_string()));
            }
        }
        Ok(())
    }

    /// `{f, g} = sum_i (df/dq^i dg/dp_i - df/dp_i dg/dq^i)`.
    pub fn bracket(&self, f: &RationalExpr, g: &RationalExpr, symbols: &Symbols) -> Result<RationalExpr, PhaseError> {
        self.check(f, symbols)?;
        self.check(g, symbols)?;
        let mut acc = RationalExpr::zero();
        for (&q, &p) in self.coords.iter().zip(&self.momenta) {
            let fq = f.derivative(q);
            let gp = g.derivative(p);
            if !fq.is_zero() && !gp.is_zero() {
                acc = &acc + &(&fq * &gp);
            }
            let fp = f.derivative(p);
            let gq = g.derivative(q);
            if !fp.is_zero() && !gq.is_zero() {
                acc = &acc - &(&fp * &gq);
            }
        }
        Ok(symbols.canonical(&acc))
    }

    /// `X_f` with `dq^i/dt = df/dp_i`, `dp_i/dt = -df/dq^i`, so `X_f(g) = {g, f}`.
    pub fn hamiltonian_vector_field(&self, f: &RationalExpr, symbols: &Symbols) -> Result<VectorField, PhaseError> {
        self.check(f, symbols)?;
        let mut field = VectorField::zero();
        for (&q, &p) in self.coords.iter().zip(&self.momenta) {
            field.set(q, symbols.canonical(&f.derivative(p)));
            field.set(p, symbols.canonical(&-f.derivative(q)));
        }
        Ok(field)
    }
}

/// Derivation `sum_v X^v d/dv`; zero components are not stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VectorField {
    components: BTreeMap<Var, RationalExpr>,
}

impl VectorField {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_components(components: impl IntoIterator<Item = (Var, RationalExpr)>) -> Self {
        let mut f = Self::zero();
        for (v, e) in components {
            f.set(v, e);
        }
        f
    }

    pub fn set(&mut self, v: Var, e: RationalExpr) {
        if e.is_zero() {
            self.components.remove(&v);
        } else {
            self.components.insert(v, e);
        }
    }

    pub fn component(&self, v: Var) -> RationalExpr {
        self.components.get(&v).cloned().unwrap_or_default()
    }

    pub fn components(&self) -> &BTreeMap<Var, RationalExpr> {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Directional derivative `X(g)`.
    pub fn apply(&self, g: &RationalExpr, symbols: &Symbols) -> RationalExpr {
        let mut acc = RationalExpr::zero();
        for (&v, c) in &self.components {
            let d = g.derivative(v);
            if !d.is_zero() {
                acc = &acc + &(c * &d);
            }
        }
        symbols.canonical(&acc)
    }

    /// Lie bracket `[X, Y]^i = X(Y^i) - Y(X^i)`.
    pub fn commutator(&self, other: &VectorField, symbols: &Symbols) -> VectorField {
        let mut keys: Vec<Var> = self.components.keys().chain(other.components.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        let mut out = VectorField::zero();
        for v in keys {
            let c = &self.apply(&other.component(v), symbols) - &other.apply(&self.component(v), symbols);
            out.set(v, symbols.canonical(&c));
        }
        out
    }

    pub fn equals(&self, other: &VectorField, symbols: &Symbols) -> bool {
        let mut keys: Vec<Var> = self.components.keys().chain(other.components.keys()).copied().collect();
        keys.dedup();
        keys.into_iter().all(|v| symbols.equal(&self.component(v), &other.component(v)))
    }

    pub fn describe(&self, symbols: &Symbols) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|(&v, c)| alloc::format!("{}: {}", symbols.name(v), symbols.display(c)))
            .collect();
        alloc::format!("{{{}}}", parts.join(", "))
    }
}

/// Ordered solved equalities `v_k = r_k`, applied in order. No right-hand
/// side mentions its own or any earlier solved symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct SubstitutionGraph {
    steps: Vec<(Var, RationalExpr)>,
    stratum: Stratum,
}

impl SubstitutionGraph {
    /// Solves the stratum's equalities one at a time, each after reduction by
    /// the previous steps, for the first symbol in `preference` that occurs
    /// linearly with a coefficient certified nonzero on the stratum.
    /// Equalities that already reduce to zero are skipped.
    pub fn build(stratum: &Stratum, symbols: &Symbols, preference: &[Var]) -> Result<Self, PhaseError> {
        let mut g = SubstitutionGraph { steps: Vec::new(), stratum: stratum.clone() };
        for eq in &stratum.equalities {
            let reduced = g.reduce(eq, symbols)?;
            if symbols.is_zero(&reduced) {
                continue;
            }
            let num = symbols.reduce_poly(reduced.numer());
            let step = solve_for_one(&num, stratum, symbols, preference).ok_or_else(|| PhaseError::Unsolvable(symbols.display(eq)))?;
            g.steps.push(step);
        }
        Ok(g)
    }

    /// Graph from explicit steps; rejects repeated or cyclic bindings.
    pub fn from_steps(steps: Vec<(Var, RationalExpr)>, stratum: Stratum, symbols: &Symbols) -> Result<Self, PhaseError> {
        for (k, (v, rhs)) in steps.iter().enumerate() {
            if steps[..k].iter().any(|(w, _)| w == v) {
                return Err(PhaseError::DuplicateSolve(symbols.name(*v).to_string()));
            }
            if let Some((w, _)) = steps[..=k].iter().find(|(w, _)| rhs.contains_var(*w)) {
                return Err(ExprError::CyclicBindings(symbols.name(*w).to_string()).into());
            }
        }
        Ok(SubstitutionGraph { steps, stratum })
    }

    pub fn empty() -> Self {
        SubstitutionGraph { steps: Vec::new(), stratum: Stratum::new("all") }
    }

    pub fn steps(&self) -> &[(Var, RationalExpr)] {
        &self.steps
    }

    pub fn stratum(&self) -> &Stratum {
        &self.stratum
    }

    pub fn solved(&self, v: Var) -> bool {
        self.steps.iter().any(|(w, _)| *w == v)
    }

    /// Representative of `e` on the stratum.
    pub fn reduce(&self, e: &RationalExpr, symbols: &Symbols) -> Result<RationalExpr, PhaseError> {
        let mut cur = symbols.canonical(e);
        for (v, rhs) in &self.steps {
            if cur.contains_var(*v) {
                let mut b = BTreeMap::new();
                b.insert(*v, rhs.clone());
                cur = symbols.substitute(&cur, &b)?;
            }
        }
        Ok(cur)
    }

    /// Fills in solved symbols of a numeric point from the free ones.
    pub fn complete_point(&self, symbols: &Symbols, point: &mut BTreeMap<Var, f64>) -> Result<(), ExprError> {
        for (v, rhs) in self.steps.iter().rev() {
            let val = symbols.eval(rhs, point)?;
            point.insert(*v, val);
        }
        Ok(())
    }
}

fn solve_for_one(
    num: &crate::symexpr::Poly,
    stratum: &Stratum,
    symbols: &Symbols,
    preference: &[Var],
) -> Option<(Var, RationalExpr)> {
    if let Some((m, _)) = num.as_term() {
        if m.factors().len() == 1 {
            return Some((m.factors()[0].0, RationalExpr::zero()));
        }
    }
    let mut order: Vec<Var> = preference.to_vec();
    order.extend(num.vars().into_iter().filter(|v| !preference.contains(v)));
    for v in order {
        if num.degree_in(v) != 1 || symbols.kind(v) == SymbolKind::Algebraic {
            continue;
        }
        let a = RationalExpr::from_poly(num.coefficient_of(v, 1));
        if stratum.certify(symbols, &a) != ZeroStatus::NonZero {
            continue;
        }
        let rest = RationalExpr::from_poly(num.coefficient_of(v, 0));
        let rhs = (-rest).try_div(&a).ok()?;
        return Some((v, symbols.canonical(&rhs)));
    }
    None
}

/// A stratum seen through its substitution graph.
pub struct OnStratum<'a> {
    pub graph: &'a SubstitutionGraph,
    pub symbols: &'a Symbols,
}

impl Domain for OnStratum<'_> {
    fn reduce(&self, e: &RationalExpr) -> RationalExpr {
        // left unreduced when the substitution is singular
        self.graph.reduce(e, self.symbols).unwrap_or_else(|_| self.symbols.canonical(e))
    }

    fn status(&self, e: &RationalExpr) -> ZeroStatus {
        self.graph.stratum.certify(self.symbols, e)
    }
}

/// `weak_reduce(e, g)`: canonical representative of `e` on `g`'s stratum.
pub fn weak_reduce(e: &RationalExpr, g: &SubstitutionGraph, symbols: &Symbols) -> Result<RationalExpr, PhaseError> {
    g.reduce(e, symbols)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Symbols, PhaseSpace) {
        let mut s = Symbols::new();
        let mut qs = Vec::new();
        for n in ["x", "y", "z"] {
            qs.push(s.add(n, SymbolKind::Coordinate).unwrap());
        }
        for n in ["x", "y", "z"] {
            s.add(&momentum_name(n), SymbolKind::Momentum).unwrap();
        }
        s.add("k", SymbolKind::Parameter).unwrap();
        let ps = PhaseSpace::from_coordinates(&s, &qs).unwrap();
        (s, ps)
    }

    #[test]
    fn constraint_bracket() {
        let (s, ps) = setup();
        let b = ps.bracket(&s.parse("p_y").unwrap(), &s.parse("p_x + y*p_z").unwrap(), &s).unwrap();
        assert_eq!(b, s.parse("-p_z").unwrap());
    }

    #[test]
    fn vector_fields_of_constraints() {
        let (s, ps) = setup();
        let x2 = ps.hamiltonian_vector_field(&s.parse("p_x + y*p_z").unwrap(), &s).unwrap();
        let expected = VectorField::from_components([
            (s.lookup("x").unwrap(), RationalExpr::one()),
            (s.lookup("z").unwrap(), s.parse("y").unwrap()),
            (s.lookup("p_y").unwrap(), s.parse("-p_z").unwrap()),
        ]);
        assert!(x2.equals(&expected, &s));
        assert!(ps.hamiltonian_vector_field(&s.parse("k").unwrap(), &s).unwrap().is_zero());
    }

    #[test]
    fn weak_reduction_on_constraint_graph() {
        let (s, ps) = setup();
        let st = Stratum::new("P").equal_zero(s.parse("p_y").unwrap()).equal_zero(s.parse("p_x + y*p_z").unwrap());
        let pref: Vec<Var> = ps.momenta().iter().chain(ps.coordinates()).copied().collect();
        let g = SubstitutionGraph::build(&st, &s, &pref).unwrap();
        assert_eq!(g.steps().len(), 2);
        assert_eq!(g.steps()[1].0, s.lookup("p_x").unwrap());
        let c2 = s.parse("p_x + y*p_z").unwrap();
        assert!(weak_reduce(&c2, &g, &s).unwrap().is_zero());
        let good = ps.bracket(&s.parse("k + p_z*x + p_y").unwrap(), &c2, &s).unwrap();
        assert!(weak_reduce(&good, &g, &s).unwrap().is_zero());
        let bad = ps.bracket(&s.parse("k + p_z*x - p_y").unwrap(), &c2, &s).unwrap();
        assert_eq!(weak_reduce(&bad, &g, &s).unwrap(), s.parse("2*p_z").unwrap());
    }

    #[test]
    fn explicit_steps_reject_cycles() {
        let (s, _) = setup();
        let x = s.lookup("x").unwrap();
        let y = s.lookup("y").unwrap();
        let steps = alloc::vec![(x, s.parse("y").unwrap()), (y, s.parse("x + 1").unwrap())];
        assert!(matches!(
            SubstitutionGraph::from_steps(steps, Stratum::new("c"), &s),
            Err(PhaseError::Expr(ExprError::CyclicBindings(_)))
        ));
    }
}
