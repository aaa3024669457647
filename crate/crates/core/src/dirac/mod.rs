//! Constraint classification, Dirac brackets, the constraint modification
//! map, stratified first-class tests and orbit bookkeeping.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::legendre::{ConstraintSystem, Stratum};
use crate::linalg::{numeric_rank, Domain, ExprMatrix, MatrixError, ZeroStatus};
use crate::phase::{OnStratum, PhaseError, PhaseSpace, SubstitutionGraph};
use crate::sample::{rng, sample_point};
use crate::symexpr::{ExprError, Rational, RationalExpr, Symbols, Var};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DiracError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error("bracket matrix is not invertible on the stratum: {0}")]
    NotInvertible(MatrixError),
    #[error("A S - I does not reduce to zero on the stratum")]
    InverseCheck,
    #[error("bracket entry {0} cannot be split into monomial zero patterns")]
    Unsplittable(String),
    #[error("sample function #{0} is not first class")]
    NotFirstClass(usize),
}

/// Solving order for phase-space graphs: momenta, then coordinates.
pub fn phase_preference(ps: &PhaseSpace) -> Vec<Var> {
    ps.momenta().iter().chain(ps.coordinates()).copied().collect()
}

/// `S_ij = {c_i, c_j}`, weakly reduced on the system's stratum.
pub fn constraint_matrix(cs: &ConstraintSystem, ps: &PhaseSpace, symbols: &Symbols) -> Result<ExprMatrix, DiracError> {
    bracket_matrix(&cs.generators, &cs.graph, ps, symbols)
}

fn bracket_matrix(
    gens: &[RationalExpr],
    graph: &SubstitutionGraph,
    ps: &PhaseSpace,
    symbols: &Symbols,
) -> Result<ExprMatrix, DiracError> {
    let k = gens.len();
    let mut s = ExprMatrix::zeros(k, k);
    for i in 0..k {
        for j in i + 1..k {
            let b = graph.reduce(&ps.bracket(&gens[i], &gens[j], symbols)?, symbols)?;
            s.set(j, i, -b.clone());
            s.set(i, j, b);
        }
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstraintClass {
    First,
    Second,
}

impl ConstraintClass {
    pub fn label(self) -> &'static str {
        match self {
            ConstraintClass::First => "first",
            ConstraintClass::Second => "second",
        }
    }
}

/// Class labels on one substratum.
#[derive(Clone, Debug)]
pub struct ClassifiedPiece {
    /// Extra conditions relative to the constraint system's stratum, e.g. `p_z!=0`.
    pub label: String,
    pub stratum: Stratum,
    pub graph: SubstitutionGraph,
    pub matrix: ExprMatrix,
    pub classes: Vec<ConstraintClass>,
}

impl ClassifiedPiece {
    pub fn of_class(&self, gens: &[RationalExpr], class: ConstraintClass) -> Vec<RationalExpr> {
        gens.iter().zip(&self.classes).filter(|(_, c)| **c == class).map(|(g, _)| g.clone()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub matrix: ExprMatrix,
    pub pieces: Vec<ClassifiedPiece>,
}

/// A generator is first class on a piece iff its row of `S` vanishes there.
/// Bracket entries whose vanishing is undecided split the stratum into the
/// zero patterns of their symbols (nonzero pattern first).
pub fn classify(cs: &ConstraintSystem, ps: &PhaseSpace, symbols: &Symbols) -> Result<Classification, DiracError> {
    let matrix = constraint_matrix(cs, ps, symbols)?;
    let domain = OnStratum { graph: &cs.graph, symbols };
    let mut split: Vec<Var> = Vec::new();
    for e in matrix.entries() {
        if domain.status(e) != ZeroStatus::Unknown {
            continue;
        }
        let (_, num, _) = e.as_monomial_ratio().ok_or_else(|| DiracError::Unsplittable(symbols.display(e)))?;
        let nz = cs.stratum.nonzero_vars();
        for &(v, _) in num.factors() {
            if !nz.contains(&v) && !split.contains(&v) {
                split.push(v);
            }
        }
    }
    split.sort();
    let pref = phase_preference(ps);
    let mut pieces = Vec::new();
    for mask in 0u32..(1 << split.len()) {
        let mut st = cs.stratum.clone();
        let mut label = Vec::new();
        for (i, &v) in split.iter().enumerate() {
            if mask & (1 << i) == 0 {
                st.nonvanishing.push(RationalExpr::var(v));
                label.push(format!("{}!=0", symbols.name(v)));
            } else {
                st.equalities.push(RationalExpr::var(v));
                label.push(format!("{}=0", symbols.name(v)));
            }
        }
        let graph = SubstitutionGraph::build(&st, symbols, &pref)?;
        let m = bracket_matrix(&cs.generators, &graph, ps, symbols)?;
        let d = OnStratum { graph: &graph, symbols };
        let classes = (0..m.rows())
            .map(|i| {
                if m.row(i).iter().all(|e| d.status(e) == ZeroStatus::Zero) {
                    ConstraintClass::First
                } else {
                    ConstraintClass::Second
                }
            })
            .collect();
        let label = if label.is_empty() { String::from("all") } else { label.join(",") };
        pieces.push(ClassifiedPiece { label, stratum: st, graph, matrix: m, classes });
    }
    Ok(Classification { matrix, pieces })
}

/// Second-class generators with their bracket matrix `S` and inverse `A`
/// (`A^{jr} S_{rl} = delta^j_l`) on a validity stratum.
#[derive(Clone, Debug)]
pub struct DiracData {
    pub second: Vec<RationalExpr>,
    pub s: ExprMatrix,
    pub a: ExprMatrix,
    pub stratum: Stratum,
    pub graph: SubstitutionGraph,
    pub ps: PhaseSpace,
}

impl DiracData {
    pub fn new(
        second: Vec<RationalExpr>,
        stratum: Stratum,
        ps: PhaseSpace,
        symbols: &Symbols,
    ) -> Result<Self, DiracError> {
        let graph = SubstitutionGraph::build(&stratum, symbols, &phase_preference(&ps))?;
        let s = bracket_matrix(&second, &graph, &ps, symbols)?;
        let a = s.inverse_on(&OnStratum { graph: &graph, symbols }).map_err(DiracError::NotInvertible)?;
        let dd = DiracData { second, s, a, stratum, graph, ps };
        if !dd.inverse_residual(symbols)?.is_zero_on(&OnStratum { graph: &dd.graph, symbols }) {
            return Err(DiracError::InverseCheck);
        }
        Ok(dd)
    }

    /// From a classified piece: its second-class generators on its stratum.
    pub fn from_piece(piece: &ClassifiedPiece, gens: &[RationalExpr], ps: &PhaseSpace, symbols: &Symbols) -> Result<Self, DiracError> {
        Self::new(piece.of_class(gens, ConstraintClass::Second), piece.stratum.clone(), ps.clone(), symbols)
    }

    /// `A S - I`.
    pub fn inverse_residual(&self, symbols: &Symbols) -> Result<ExprMatrix, DiracError> {
        let prod = self.a.mul(&self.s).map_err(DiracError::NotInvertible)?;
        let r = prod.sub(&ExprMatrix::identity(self.s.rows())).map_err(DiracError::NotInvertible)?;
        Ok(r.map(|e| symbols.canonical(e)))
    }

    fn brackets_with_second(&self, f: &RationalExpr, symbols: &Symbols) -> Result<Vec<RationalExpr>, DiracError> {
        self.second.iter().map(|s| Ok(self.ps.bracket(f, s, symbols)?)).collect()
    }

    pub fn reduce(&self, e: &RationalExpr, symbols: &Symbols) -> Result<RationalExpr, DiracError> {
        Ok(self.graph.reduce(e, symbols)?)
    }
}

/// `{f, g}* = {f, g} - {f, s_j} A^{jk} {s_k, g}`.
pub fn dirac_bracket(f: &RationalExpr, g: &RationalExpr, dd: &DiracData, symbols: &Symbols) -> Result<RationalExpr, DiracError> {
    let fs = dd.brackets_with_second(f, symbols)?;
    let sg: Vec<RationalExpr> = dd.second.iter().map(|s| dd.ps.bracket(s, g, symbols)).collect::<Result<_, _>>()?;
    let mut acc = dd.ps.bracket(f, g, symbols)?;
    for (j, fj) in fs.iter().enumerate() {
        if fj.is_zero() {
            continue;
        }
        for (k, gk) in sg.iter().enumerate() {
            let a = dd.a.get(j, k);
            if a.is_zero() || gk.is_zero() {
                continue;
            }
            acc = &acc - &(&(fj * a) * gk);
        }
    }
    Ok(symbols.canonical(&acc))
}

/// `f* = f - {f, s_j} A^{jl} s_l`.
pub fn modify_first_class(f: &RationalExpr, dd: &DiracData, symbols: &Symbols) -> Result<RationalExpr, DiracError> {
    let fs = dd.brackets_with_second(f, symbols)?;
    let mut acc = f.clone();
    for (j, fj) in fs.iter().enumerate() {
        if fj.is_zero() {
            continue;
        }
        for (l, sl) in dd.second.iter().enumerate() {
            let a = dd.a.get(j, l);
            if !a.is_zero() {
                acc = &acc - &(&(fj * a) * sl);
            }
        }
    }
    Ok(symbols.canonical(&acc))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tangency {
    Tangent,
    /// `X_f(equality)` does not reduce to zero on the piece.
    Transverse { equality: RationalExpr, residual: RationalExpr },
    /// `f` or its field is not defined on the piece.
    Undefined { reason: String },
}

#[derive(Clone, Debug)]
pub struct PieceVerdict {
    pub piece: String,
    pub stratum: Stratum,
    pub verdict: Tangency,
}

#[derive(Clone, Debug)]
pub struct TangencyReport {
    pub pieces: Vec<PieceVerdict>,
}

impl TangencyReport {
    pub fn pass(&self) -> bool {
        self.pieces.iter().all(|p| p.verdict == Tangency::Tangent)
    }

    pub fn first_failure(&self) -> Option<&PieceVerdict> {
        self.pieces.iter().find(|p| p.verdict != Tangency::Tangent)
    }
}

/// All connected pieces of the declared strata (sign splits applied).
pub fn pieces_of(strata: &[Stratum], symbols: &Symbols) -> Vec<Stratum> {
    strata.iter().flat_map(|s| s.sign_pieces(symbols)).collect()
}

/// `f` is first class iff `X_f` is tangent to every piece: `X_f(e_k)`
/// reduces to zero on the piece for each of its defining equalities.
pub fn first_class_tangency(f: &RationalExpr, strata: &[Stratum], ps: &PhaseSpace, symbols: &Symbols) -> Result<TangencyReport, DiracError> {
    let field = ps.hamiltonian_vector_field(f, symbols)?;
    let pref = phase_preference(ps);
    let mut out = Vec::new();
    for piece in pieces_of(strata, symbols) {
        let graph = SubstitutionGraph::build(&piece, symbols, &pref)?;
        let mut verdict = Tangency::Tangent;
        for e in &piece.equalities {
            match graph.reduce(&field.apply(e, symbols), symbols) {
                Ok(r) if symbols.is_zero(&r) => {}
                Ok(r) => {
                    verdict = Tangency::Transverse { equality: e.clone(), residual: r };
                    break;
                }
                Err(err) => {
                    verdict = Tangency::Undefined { reason: format!("{err}") };
                    break;
                }
            }
        }
        if verdict == Tangency::Tangent {
            if let Err(err) = graph.reduce(f, symbols) {
                verdict = Tangency::Undefined { reason: format!("{err}") };
            }
        }
        out.push(PieceVerdict { piece: piece.name.clone(), stratum: piece, verdict });
    }
    Ok(TangencyReport { pieces: out })
}

#[derive(Clone, Debug)]
pub struct Orbit {
    pub label: String,
    pub stratum: Stratum,
    pub dimension: usize,
}

#[derive(Clone, Debug)]
pub struct ReducedClass {
    pub orbits: Vec<String>,
    /// Common constant values of the sample functions, when merged.
    pub values: Option<Vec<Rational>>,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct OrbitReport {
    pub orbits: Vec<Orbit>,
    pub classes: Vec<ReducedClass>,
}

/// Enumerates orbit pieces and groups them into reduced classes: pieces on
/// which every sample function restricts to a constant are merged when the
/// constants agree; any other piece is its own class.
pub fn orbit_report(
    strata: &[Stratum],
    sample_fns: &[RationalExpr],
    ps: &PhaseSpace,
    symbols: &Symbols,
    seed: u64,
) -> Result<OrbitReport, DiracError> {
    for (i, f) in sample_fns.iter().enumerate() {
        if !first_class_tangency(f, strata, ps, symbols)?.pass() {
            return Err(DiracError::NotFirstClass(i));
        }
    }
    let pref = phase_preference(ps);
    let vars = ps.vars();
    let mut orbits = Vec::new();
    let mut classes: Vec<ReducedClass> = Vec::new();
    let mut merged: BTreeMap<Vec<Rational>, usize> = BTreeMap::new();
    let mut r = rng(seed);
    for piece in pieces_of(strata, symbols) {
        let graph = SubstitutionGraph::build(&piece, symbols, &pref)?;
        let free: Vec<Var> = vars.iter().copied().filter(|v| !graph.solved(*v)).collect();
        let dimension = free.len();
        let restricted: Vec<RationalExpr> = sample_fns.iter().map(|f| graph.reduce(f, symbols)).collect::<Result<_, _>>()?;
        let constants: Option<Vec<Rational>> = restricted.iter().map(|e| e.as_constant()).collect();
        let label = piece.name.clone();
        match constants {
            Some(values) => {
                if let Some(&idx) = merged.get(&values) {
                    classes[idx].orbits.push(label.clone());
                } else {
                    merged.insert(values.clone(), classes.len());
                    classes.push(ReducedClass {
                        orbits: alloc::vec![label.clone()],
                        values: Some(values),
                        note: String::from("every sample function is constant: one point of the reduced space"),
                    });
                }
            }
            None => {
                let rank = jacobian_rank(&restricted, &free, &piece, &graph, symbols, &mut r);
                let note = match rank {
                    Some(k) if k == dimension => format!("sample functions separate points (jacobian rank {k} of {dimension})"),
                    Some(k) => format!("sample functions do not separate points (jacobian rank {k} of {dimension})"),
                    None => String::from("no sample point found"),
                };
                classes.push(ReducedClass { orbits: alloc::vec![label.clone()], values: None, note });
            }
        }
        orbits.push(Orbit { label, stratum: piece, dimension });
    }
    Ok(OrbitReport { orbits, classes })
}

fn jacobian_rank(
    fns: &[RationalExpr],
    free: &[Var],
    piece: &Stratum,
    graph: &SubstitutionGraph,
    symbols: &Symbols,
    r: &mut crate::sample::SampleRng,
) -> Option<usize> {
    let point = sample_point(piece, graph, symbols, free, &BTreeMap::new(), r)?;
    let mut values = Vec::with_capacity(fns.len() * free.len());
    for f in fns {
        for &v in free {
            values.push(symbols.eval(&f.derivative(v), &point).ok()?);
        }
    }
    Some(numeric_rank(&values, fns.len(), free.len(), 1e-9))
}
