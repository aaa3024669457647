//! From a Lagrangian to momenta, rank strata, primary constraints, energy,
//! per-stratum Hamiltonians and the Lagrange two-form.

pub mod stratum;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{numeric_rank, subsets, Domain, ExprMatrix, MatrixError, ZeroStatus};
use crate::phase::{OnStratum, PhaseError, PhaseSpace, SubstitutionGraph, VectorField};
use crate::sample::{rng, sample_point};
use crate::symexpr::{
    acceleration_name, momentum_name, velocity_name, ExprError, RationalExpr, SymbolKind, Symbols, Var,
};
pub use stratum::{Sign, StratifiedSet, Stratum, TAU_EQ};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LegendreError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("lagrangian must be a polynomial of degree exactly 2 in the velocities")]
    NonQuadratic,
    #[error("lagrangian mentions `{0}`, which is not a coordinate, velocity or parameter")]
    ForeignSymbol(String),
    #[error("minor {0} is not a monomial; declare configuration strata instead")]
    UnsupportedMinor(String),
    #[error("stratum `{stratum}`: symbolic rank {symbolic} but numeric rank {numeric}")]
    RankMismatch { stratum: String, symbolic: usize, numeric: usize },
    #[error("stratum `{stratum}`: no sample point found")]
    NoSample { stratum: String },
    #[error("stratum `{stratum}`: null space pivot fails, undecided entries {entries:?}")]
    PivotFailure { stratum: String, entries: Vec<RationalExpr> },
    #[error("stratum `{stratum}`: energy is not constant along fibres, witness {witness:?}")]
    FiberViolation { stratum: String, witness: RationalExpr },
    #[error("stratum `{stratum}`: pulled-back Hamiltonian differs from the energy by {witness:?}")]
    PushforwardMismatch { stratum: String, witness: RationalExpr },
    #[error("symmetry component `{0}` is not a coordinate")]
    BadSymmetry(String),
}

/// Complete problem instance.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub symbols: Symbols,
    pub coords: Vec<Var>,
    pub velocities: Vec<Var>,
    pub momenta: Vec<Var>,
    pub accelerations: Vec<Var>,
    pub lagrangian: RationalExpr,
    pub symmetries: Vec<(String, VectorField)>,
    /// Declared rank strata of configuration space; derived when absent.
    pub configuration_strata: Option<Vec<Stratum>>,
    /// Declared pieces of the constraint set in phase space.
    pub constraint_strata: Vec<Stratum>,
    /// Declared initial-data conditions on velocity space.
    pub initial_data: Vec<RationalExpr>,
}

impl ModelSpec {
    /// Declares `q`, `q_dot`, `p_q`, `q_ddot` for each coordinate, in that
    /// block order, with a zero Lagrangian.
    pub fn new(coordinates: &[&str]) -> Result<Self, LegendreError> {
        let mut symbols = Symbols::new();
        let mut coords = Vec::new();
        for q in coordinates {
            coords.push(symbols.add(q, SymbolKind::Coordinate)?);
        }
        let mut velocities = Vec::new();
        for q in coordinates {
            velocities.push(symbols.add(&velocity_name(q), SymbolKind::Velocity)?);
        }
        let mut momenta = Vec::new();
        for q in coordinates {
            momenta.push(symbols.add(&momentum_name(q), SymbolKind::Momentum)?);
        }
        let mut accelerations = Vec::new();
        for q in coordinates {
            accelerations.push(symbols.add(&acceleration_name(q), SymbolKind::Acceleration)?);
        }
        Ok(ModelSpec {
            symbols,
            coords,
            velocities,
            momenta,
            accelerations,
            lagrangian: RationalExpr::zero(),
            symmetries: Vec::new(),
            configuration_strata: None,
            constraint_strata: Vec::new(),
            initial_data: Vec::new(),
        })
    }

    pub fn add_parameter(&mut self, name: &str) -> Result<Var, LegendreError> {
        Ok(self.symbols.add(name, SymbolKind::Parameter)?)
    }

    pub fn add_algebraic(&mut self, name: &str, relation: &str) -> Result<Var, LegendreError> {
        Ok(self.symbols.add_algebraic(name, relation)?)
    }

    pub fn parse(&self, text: &str) -> Result<RationalExpr, LegendreError> {
        Ok(self.symbols.parse(text)?)
    }

    pub fn set_lagrangian(&mut self, text: &str) -> Result<(), LegendreError> {
        let l = self.parse(text)?;
        for v in l.vars() {
            if matches!(self.symbols.kind(v), SymbolKind::Momentum | SymbolKind::Acceleration) {
                return Err(LegendreError::ForeignSymbol(self.symbols.name(v).to_string()));
            }
        }
        self.lagrangian = l;
        Ok(())
    }

    /// Adds a vector field on configuration space given as `(coordinate, component)` pairs.
    pub fn add_symmetry(&mut self, name: &str, components: &[(&str, &str)]) -> Result<(), LegendreError> {
        let mut field = VectorField::zero();
        for &(q, text) in components {
            let v = self.symbols.lookup(q)?;
            if !self.coords.contains(&v) {
                return Err(LegendreError::BadSymmetry(q.to_string()));
            }
            field.set(v, self.parse(text)?);
        }
        self.symmetries.push((name.to_string(), field));
        Ok(())
    }

    pub fn phase_space(&self) -> PhaseSpace {
        PhaseSpace::new(self.coords.clone(), self.momenta.clone()).expect("equal lengths")
    }

    pub fn dof(&self) -> usize {
        self.coords.len()
    }

    pub fn name(&self, v: Var) -> &str {
        self.symbols.name(v)
    }

    pub fn velocity_of(&self, q: Var) -> Var {
        self.velocities[self.coords.iter().position(|&c| c == q).expect("coordinate")]
    }

    /// Bindings sending every velocity to zero.
    fn velocities_to_zero(&self) -> BTreeMap<Var, RationalExpr> {
        self.velocities.iter().map(|&v| (v, RationalExpr::zero())).collect()
    }

    /// Solving order for substitution graphs: momenta, coordinates, velocities.
    pub fn solve_preference(&self) -> Vec<Var> {
        self.momenta.iter().chain(&self.coords).chain(&self.velocities).copied().collect()
    }

    pub fn graph(&self, stratum: &Stratum) -> Result<SubstitutionGraph, LegendreError> {
        Ok(SubstitutionGraph::build(stratum, &self.symbols, &self.solve_preference())?)
    }

    /// `p_i(q, v)` substitution map.
    pub fn momentum_bindings(&self) -> Result<BTreeMap<Var, RationalExpr>, LegendreError> {
        let p = legendre_map(self)?;
        Ok(self.momenta.iter().copied().zip(p).collect())
    }
}

fn check_quadratic(m: &ModelSpec) -> Result<(), LegendreError> {
    let l = &m.lagrangian;
    if m.velocities.iter().any(|&v| l.denom().contains_var(v)) {
        return Err(LegendreError::NonQuadratic);
    }
    let deg = l
        .numer()
        .terms()
        .map(|(mono, _)| mono.factors().iter().filter(|(v, _)| m.velocities.contains(v)).map(|&(_, e)| e).sum::<u32>())
        .max()
        .unwrap_or(0);
    if deg != 2 {
        return Err(LegendreError::NonQuadratic);
    }
    Ok(())
}

/// `M_ij = d^2 l / dv^i dv^j`, a matrix over the coordinates.
pub fn velocity_hessian(m: &ModelSpec) -> Result<ExprMatrix, LegendreError> {
    check_quadratic(m)?;
    let s = &m.symbols;
    let n = m.dof();
    let first: Vec<RationalExpr> = m.velocities.iter().map(|&v| s.canonical(&m.lagrangian.derivative(v))).collect();
    Ok(ExprMatrix::from_fn(n, n, |i, j| s.canonical(&first[i].derivative(m.velocities[j]))))
}

/// `p_i = dl/dv^i`.
pub fn legendre_map(m: &ModelSpec) -> Result<Vec<RationalExpr>, LegendreError> {
    Ok(m.velocities.iter().map(|&v| m.symbols.canonical(&m.lagrangian.derivative(v))).collect())
}

/// `e = sum_i p_i v^i - l`.
pub fn energy(m: &ModelSpec) -> Result<RationalExpr, LegendreError> {
    let p = legendre_map(m)?;
    let mut e = -m.lagrangian.clone();
    for (pi, &v) in p.iter().zip(&m.velocities) {
        e = &e + &(pi * &RationalExpr::var(v));
    }
    Ok(m.symbols.canonical(&e))
}

/// Rank data of one configuration stratum.
#[derive(Clone, Debug)]
pub struct RankStratum {
    pub rank: usize,
    pub graph: SubstitutionGraph,
    /// Kernel basis of the velocity Hessian on the stratum.
    pub kernel: Vec<Vec<RationalExpr>>,
    /// Sample point used for the numeric rank check.
    pub sample: BTreeMap<Var, f64>,
}

fn stratum_rank(m: &ModelSpec, hess: &ExprMatrix, st: &Stratum, seed: u64) -> Result<RankStratum, LegendreError> {
    let s = &m.symbols;
    let graph = m.graph(st)?;
    let domain = OnStratum { graph: &graph, symbols: s };
    let ns = hess.null_space_on(&domain).map_err(|e| match e {
        MatrixError::PivotFailure { candidates, .. } => LegendreError::PivotFailure { stratum: st.name.clone(), entries: candidates },
        other => other.into(),
    })?;
    let mut r = rng(seed);
    let free: Vec<Var> = m.coords.iter().chain(&s.of_kind(SymbolKind::Parameter)).copied().collect();
    let sample = sample_point(st, &graph, s, &free, &BTreeMap::new(), &mut r)
        .ok_or_else(|| LegendreError::NoSample { stratum: st.name.clone() })?;
    let values = hess.eval(|e| s.eval(e, &sample))?;
    let numeric = numeric_rank(&values, hess.rows(), hess.cols(), 1e-9);
    if numeric != ns.rank {
        return Err(LegendreError::RankMismatch { stratum: st.name.clone(), symbolic: ns.rank, numeric });
    }
    Ok(RankStratum { rank: ns.rank, graph, kernel: ns.basis, sample })
}

/// Partition of configuration space by the rank of the velocity Hessian.
///
/// Declared strata are used when present. Otherwise: if some constant
/// minor already attains the generic rank, there is a single stratum
/// `all`; else every minor of the relevant sizes must be a monomial, and
/// strata are the zero patterns of the symbols occurring in them, with
/// symbols that never affect the rank dropped.
pub fn rank_strata(hess: &ExprMatrix, m: &ModelSpec) -> Result<StratifiedSet<RankStratum>, LegendreError> {
    let strata = match &m.configuration_strata {
        Some(declared) => declared.clone(),
        None => auto_strata(hess, m)?,
    };
    let mut out = StratifiedSet::new();
    for (i, st) in strata.into_iter().enumerate() {
        let data = stratum_rank(m, hess, &st, 0x5eed + i as u64)?;
        out.push(st, data);
    }
    Ok(out)
}

fn auto_strata(hess: &ExprMatrix, m: &ModelSpec) -> Result<Vec<Stratum>, LegendreError> {
    let s = &m.symbols;
    let generic = hess.generic_rank(s);
    let mut by_size: Vec<Vec<RationalExpr>> = vec![Vec::new()];
    let mut constant_rank = 0;
    for k in 1..=generic {
        let minors: Vec<RationalExpr> = hess.minors(k, s).into_iter().map(|(_, _, d)| d).filter(|d| !d.is_zero()).collect();
        if minors.iter().any(|d| d.is_constant()) {
            constant_rank = k;
        }
        by_size.push(minors);
    }
    if constant_rank == generic {
        return Ok(vec![Stratum::new("all")]);
    }
    let mut syms: Vec<Var> = Vec::new();
    for minors in &by_size[constant_rank + 1..] {
        for d in minors {
            let Some((_, num, den)) = d.as_monomial_ratio() else {
                return Err(LegendreError::UnsupportedMinor(m.symbols.display(d)));
            };
            for &(v, _) in num.factors().iter().chain(den.factors()) {
                if !syms.contains(&v) {
                    syms.push(v);
                }
            }
        }
    }
    syms.sort();
    let rank_for = |zero: &dyn Fn(Var) -> bool| -> usize {
        (constant_rank + 1..=generic)
            .rev()
            .find(|&k| {
                by_size[k].iter().any(|d| {
                    let (_, num, _) = d.as_monomial_ratio().expect("checked");
                    num.factors().iter().all(|&(v, _)| !zero(v))
                })
            })
            .unwrap_or(constant_rank)
    };
    let patterns = 1u32 << syms.len();
    let rank_of = |mask: u32| rank_for(&|v: Var| syms.iter().position(|&w| w == v).is_some_and(|i| mask & (1 << i) != 0));
    let relevant: Vec<usize> =
        (0..syms.len()).filter(|&i| (0..patterns).any(|mask| rank_of(mask) != rank_of(mask ^ (1 << i)))).collect();
    if relevant.is_empty() {
        return Ok(vec![Stratum::new("all")]);
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << relevant.len()) {
        let mut st = Stratum::new(String::new());
        let mut label = Vec::new();
        for (bit, &i) in relevant.iter().enumerate() {
            let v = syms[i];
            if mask & (1 << bit) != 0 {
                st.equalities.push(RationalExpr::var(v));
                label.push(format!("{}=0", s.name(v)));
            } else {
                st.nonvanishing.push(RationalExpr::var(v));
                label.push(format!("{}!=0", s.name(v)));
            }
        }
        st.name = label.join(",");
        out.push(st);
    }
    Ok(out)
}

/// Constraint generators of one rank stratum.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    /// Configuration-space rank stratum.
    pub config: Stratum,
    pub rank: usize,
    /// `c_a = sum_i u_i^(a) p_i`.
    pub generators: Vec<RationalExpr>,
    pub null_vectors: Vec<Vec<RationalExpr>>,
    /// Phase-space stratum: configuration conditions plus `c_a = 0`.
    pub stratum: Stratum,
    pub graph: SubstitutionGraph,
}

/// Primary constraints on each rank stratum, checked to annihilate the
/// image of the Legendre map there.
pub fn primary_constraints(m: &ModelSpec, strata: &StratifiedSet<RankStratum>) -> Result<Vec<ConstraintSystem>, LegendreError> {
    let s = &m.symbols;
    let pb = m.momentum_bindings()?;
    let mut out = Vec::new();
    for (st, data) in strata.iter() {
        let mut generators = Vec::new();
        for u in &data.kernel {
            let mut c = RationalExpr::zero();
            for (ui, &p) in u.iter().zip(&m.momenta) {
                c = &c + &(ui * &RationalExpr::var(p));
            }
            let c = s.canonical(&c);
            let image = data.graph.reduce(&s.substitute(&c, &pb)?, s)?;
            if !s.is_zero(&image) {
                return Err(LegendreError::PushforwardMismatch { stratum: st.name.clone(), witness: image });
            }
            generators.push(c);
        }
        let mut phase = st.clone();
        phase.equalities.extend(generators.iter().cloned());
        let graph = m.graph(&phase)?;
        out.push(ConstraintSystem {
            config: st.clone(),
            rank: data.rank,
            generators,
            null_vectors: data.kernel.clone(),
            stratum: phase,
            graph,
        });
    }
    Ok(out)
}

/// Hamiltonian on one rank stratum.
#[derive(Clone, Debug)]
pub struct StratumHamiltonian {
    pub stratum: Stratum,
    pub h: RationalExpr,
    /// Velocity indices of the invertible principal block used.
    pub block: Vec<usize>,
    /// `de/dv . w` for each kernel vector `w`, all reduced to zero.
    pub fiber_certificate: Vec<RationalExpr>,
}

/// `h = 1/2 (p - b)_B^T M_BB^{-1} (p - b)_B - c` for `l = 1/2 v^T M v + b.v + c`,
/// with `B` a principal block certified invertible on the stratum. Checks
/// that `h(q, p(q, v)) = e` there and that `e` is constant on fibres.
pub fn pushforward_hamiltonian(
    m: &ModelSpec,
    hess: &ExprMatrix,
    strata: &StratifiedSet<RankStratum>,
) -> Result<Vec<StratumHamiltonian>, LegendreError> {
    let s = &m.symbols;
    let zero_v = m.velocities_to_zero();
    let c = s.substitute(&m.lagrangian, &zero_v)?;
    let b: Vec<RationalExpr> =
        m.velocities.iter().map(|&v| s.substitute(&m.lagrangian.derivative(v), &zero_v)).collect::<Result<_, _>>()?;
    let e = energy(m)?;
    let pb = m.momentum_bindings()?;
    let mut out = Vec::new();
    for (st, data) in strata.iter() {
        let domain = OnStratum { graph: &data.graph, symbols: s };
        let block = principal_block(hess, data.rank, &domain, s)
            .ok_or_else(|| LegendreError::PivotFailure { stratum: st.name.clone(), entries: Vec::new() })?;
        let sub = hess.submatrix(&block, &block);
        let inv = sub.inverse_on(&domain)?;
        let shifted: Vec<RationalExpr> = block.iter().map(|&i| &RationalExpr::var(m.momenta[i]) - &b[i]).collect();
        let mut h = -c.clone();
        for (a, ya) in shifted.iter().enumerate() {
            for (bb, yb) in shifted.iter().enumerate() {
                let t = &(ya * inv.get(a, bb)) * yb;
                h = &h + &t.scale(&crate::symexpr::Rational::new(1.into(), 2.into()));
            }
        }
        let h = domain.reduce(&h);
        let pulled = s.substitute(&h, &pb)?;
        let diff = data.graph.reduce(&(&pulled - &e), s)?;
        if !s.is_zero(&diff) {
            return Err(LegendreError::PushforwardMismatch { stratum: st.name.clone(), witness: diff });
        }
        let mut cert = Vec::new();
        for w in &data.kernel {
            let mut d = RationalExpr::zero();
            for (wi, &v) in w.iter().zip(&m.velocities) {
                d = &d + &(wi * &e.derivative(v));
            }
            let d = data.graph.reduce(&d, s)?;
            if !s.is_zero(&d) {
                return Err(LegendreError::FiberViolation { stratum: st.name.clone(), witness: d });
            }
            cert.push(d);
        }
        out.push(StratumHamiltonian { stratum: st.clone(), h, block, fiber_certificate: cert });
    }
    Ok(out)
}

/// Principal `r x r` block with determinant certified nonzero, preferring
/// constant determinants, then fewer terms.
fn principal_block(hess: &ExprMatrix, r: usize, domain: &impl Domain, symbols: &Symbols) -> Option<Vec<usize>> {
    let reduced = hess.map(|e| domain.reduce(e));
    let mut best: Option<((bool, usize), Vec<usize>)> = None;
    for set in subsets(hess.rows(), r) {
        let sub = reduced.submatrix(&set, &set);
        let d = domain.reduce(&sub.det(symbols).ok()?);
        if domain.status(&d) != ZeroStatus::NonZero {
            continue;
        }
        let key = (!d.is_constant(), d.numer().len() + d.denom().len());
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, set));
        }
    }
    best.map(|(_, s)| s)
}

/// Coefficients of `omega_l = sum_i dp_i(q, v) ^ dq^i` in the basis
/// `(dq, dv)`, as an antisymmetric `2n x 2n` matrix.
pub fn lagrange_two_form(m: &ModelSpec) -> Result<ExprMatrix, LegendreError> {
    let s = &m.symbols;
    let n = m.dof();
    let p = legendre_map(m)?;
    let mut w = ExprMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let qq = &p[k].derivative(m.coords[j]) - &p[j].derivative(m.coords[k]);
            w.set(j, k, s.canonical(&qq));
            let mjk = s.canonical(&p[j].derivative(m.velocities[k]));
            w.set(n + k, j, mjk.clone());
            w.set(j, n + k, -mjk);
        }
    }
    Ok(w)
}

/// Components of `d omega` for the matrix from [`lagrange_two_form`];
/// empty when the form is closed.
pub fn closedness_defects(m: &ModelSpec, omega: &ExprMatrix) -> Vec<(usize, usize, usize, RationalExpr)> {
    let s = &m.symbols;
    let z: Vec<Var> = m.coords.iter().chain(&m.velocities).copied().collect();
    let mut out = Vec::new();
    for t in subsets(z.len(), 3) {
        let (a, b, c) = (t[0], t[1], t[2]);
        let d = &(&omega.get(b, c).derivative(z[a]) + &omega.get(c, a).derivative(z[b])) + &omega.get(a, b).derivative(z[c]);
        if !s.is_zero(&d) {
            out.push((a, b, c, d));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_a() -> ModelSpec {
        let mut m = ModelSpec::new(&["x", "y", "z"]).unwrap();
        m.set_lagrangian("0.5*(y^2*x_dot^2 - 2*y*x_dot*z_dot + z_dot^2)").unwrap();
        m
    }

    fn example_b() -> ModelSpec {
        let mut m = ModelSpec::new(&["x", "y"]).unwrap();
        m.set_lagrangian("(y^2*x_dot^2 + x^2*y_dot^2)/2").unwrap();
        m
    }

    #[test]
    fn hessian_and_momenta() {
        let m = example_a();
        let h = velocity_hessian(&m).unwrap();
        let expected = ExprMatrix::from_rows(vec![
            vec![m.parse("y^2").unwrap(), RationalExpr::zero(), m.parse("-y").unwrap()],
            vec![RationalExpr::zero(); 3],
            vec![m.parse("-y").unwrap(), RationalExpr::zero(), RationalExpr::one()],
        ])
        .unwrap();
        assert_eq!(h, expected);
        let p = legendre_map(&m).unwrap();
        assert_eq!(p[0], m.parse("y^2*x_dot - y*z_dot").unwrap());
        assert!(p[1].is_zero());
        assert_eq!(energy(&m).unwrap(), m.lagrangian);
    }

    #[test]
    fn non_quadratic_rejected() {
        let mut m = ModelSpec::new(&["x"]).unwrap();
        m.set_lagrangian("x_dot^4").unwrap();
        assert_eq!(velocity_hessian(&m), Err(LegendreError::NonQuadratic));
    }

    #[test]
    fn strata_and_constraints_of_nonconstant_rank_example() {
        let m = example_b();
        let hess = velocity_hessian(&m).unwrap();
        let strata = rank_strata(&hess, &m).unwrap();
        let names: Vec<&str> = strata.iter().map(|(s, _)| s.name.as_str()).collect();
        assert_eq!(names, ["x!=0,y!=0", "x=0,y!=0", "x!=0,y=0", "x=0,y=0"]);
        let ranks: Vec<usize> = strata.iter().map(|(_, d)| d.rank).collect();
        assert_eq!(ranks, [2, 1, 1, 0]);
        let cs = primary_constraints(&m, &strata).unwrap();
        assert!(cs[0].generators.is_empty());
        assert_eq!(cs[1].generators, vec![m.parse("p_y").unwrap()]);
        assert_eq!(cs[2].generators, vec![m.parse("p_x").unwrap()]);
        assert_eq!(cs[3].generators, vec![m.parse("p_x").unwrap(), m.parse("p_y").unwrap()]);
        let hs = pushforward_hamiltonian(&m, &hess, &strata).unwrap();
        assert_eq!(hs[0].h, m.parse("p_x^2/(2*y^2) + p_y^2/(2*x^2)").unwrap());
        assert_eq!(hs[1].h, m.parse("p_x^2/(2*y^2)").unwrap());
        assert!(hs[3].h.is_zero());
    }

    #[test]
    fn constant_rank_example() {
        let m = example_a();
        let hess = velocity_hessian(&m).unwrap();
        let strata = rank_strata(&hess, &m).unwrap();
        assert_eq!(strata.len(), 1);
        assert_eq!(strata.pieces[0].0.name, "all");
        let cs = primary_constraints(&m, &strata).unwrap();
        assert_eq!(cs[0].generators, vec![m.parse("p_y").unwrap(), m.parse("p_x + y*p_z").unwrap()]);
        let hs = pushforward_hamiltonian(&m, &hess, &strata).unwrap();
        assert_eq!(hs[0].h, m.parse("p_z^2/2").unwrap());
    }

    #[test]
    fn two_form_is_closed_and_degenerate() {
        let m = example_a();
        let w = lagrange_two_form(&m).unwrap();
        assert!(w.is_antisymmetric(&m.symbols));
        assert!(closedness_defects(&m, &w).is_empty());
        assert!(w.det(&m.symbols).unwrap().is_zero());
    }

    #[test]
    fn potential_flips_sign_in_energy() {
        let mut m = ModelSpec::new(&["x"]).unwrap();
        m.set_lagrangian("x_dot^2/2 - x^4").unwrap();
        assert_eq!(energy(&m).unwrap(), m.parse("x_dot^2/2 + x^4").unwrap());
    }
}
