//! Analysis reports in JSON and text form.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use dirac_core::dirac::{first_class_tangency, modify_first_class, orbit_report, DiracData, Tangency};
use dirac_core::dynamics::{initial_data_report, killing_check, noether, reduction_chart_verify, DynamicsError};
use dirac_core::legendre::{closedness_defects, lagrange_two_form};
use dirac_core::linalg::ExprMatrix;
use dirac_core::phase::SubstitutionGraph;
use dirac_core::symexpr::{RationalExpr, Symbols};
use serde::{Deserialize, Serialize};

use crate::analysis::{core_error, legendre_error, Analysis};
use crate::error::CliError;
use crate::model::Model;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub coordinates: Vec<String>,
    pub lagrangian: String,
    pub strata: Vec<StratumReport>,
    pub omega: OmegaReport,
    pub first_class: Vec<FirstClassReport>,
    pub symmetries: Vec<SymmetryReport>,
    pub reduction: Option<ReductionReport>,
    pub orbits: Option<OrbitSummary>,
    pub warnings: Vec<Warning>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumReport {
    pub name: String,
    pub conditions: String,
    pub rank: usize,
    pub constraints: Vec<String>,
    pub hamiltonian: String,
    /// Acceleration-free consequences of the Euler-Lagrange equations.
    pub consequences: Vec<String>,
    pub s_matrix: Vec<Vec<String>>,
    pub pieces: Vec<PieceReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceReport {
    pub label: String,
    pub conditions: String,
    pub classes: Vec<String>,
    /// Inverse of the second class bracket matrix, when there is one.
    pub a_matrix: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaReport {
    pub generic_rank: usize,
    pub closed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstClassReport {
    pub function: String,
    pub first_class: bool,
    pub pieces: Vec<PieceVerdictReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceVerdictReport {
    pub piece: String,
    pub verdict: String,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub name: String,
    pub field: String,
    pub invariant: bool,
    pub momentum: Option<String>,
    pub witness: Option<String>,
    /// Lie derivative of the velocity Hessian along the field.
    pub killing: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub brackets: Vec<String>,
    pub h_reduced: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub orbits: Vec<OrbitEntry>,
    pub classes: Vec<ClassEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitEntry {
    pub label: String,
    pub dimension: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub orbits: Vec<String>,
    pub values: Option<Vec<String>>,
    pub note: String,
}

/// Structured discrepancy between a printed statement and the computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub code: String,
    pub message: String,
    pub details: BTreeMap<String, String>,
}

impl Warning {
    fn new(code: &str, message: impl Into<String>, details: &[(&str, String)]) -> Warning {
        Warning {
            code: code.into(),
            message: message.into(),
            details: details.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }
}

fn matrix(m: &ExprMatrix, s: &Symbols) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| r.iter().map(|e| s.display(e)).collect()).collect()
}

fn verdict_text(t: &Tangency) -> (String, Option<String>) {
    match t {
        Tangency::Tangent => ("tangent".into(), None),
        Tangency::Transverse { .. } => ("transverse".into(), None),
        Tangency::Undefined { reason } => ("undefined".into(), Some(reason.clone())),
    }
}

/// Functions tested for first-class-ness: Hamiltonians, Noether momenta,
/// coordinates and any listed in `known`, without repeats.
pub fn first_class_candidates(model: &Model, analysis: &Analysis) -> Vec<RationalExpr> {
    let m = &model.spec;
    let mut out: Vec<RationalExpr> = Vec::new();
    let mut push = |e: RationalExpr| {
        if !out.contains(&e) {
            out.push(e);
        }
    };
    for h in &analysis.hamiltonians {
        push(h.h.clone());
    }
    for (_, x) in &m.symmetries {
        if let Ok(r) = noether(m, x) {
            push(r.momentum);
        }
    }
    for &q in &m.coords {
        push(RationalExpr::var(q));
    }
    if let Some(k) = &model.file.known {
        for t in k.first_class.iter().chain(&k.not_first_class) {
            if let Ok(e) = m.parse(t) {
                push(e);
            }
        }
    }
    out
}

pub fn build_report(model: &Model, analysis: &Analysis, seed: u64) -> Result<AnalysisReport, CliError> {
    let m = &model.spec;
    let s = &m.symbols;
    let ps = m.phase_space();
    let mut warnings = Vec::new();

    let mut strata = Vec::new();
    for (i, cs) in analysis.systems.iter().enumerate() {
        let cl = &analysis.classifications[i];
        let mut pieces = Vec::new();
        for piece in &cl.pieces {
            let a_matrix = match DiracData::from_piece(piece, &cs.generators, &ps, s) {
                Ok(dd) if !dd.second.is_empty() => Some(matrix(&dd.a, s)),
                _ => None,
            };
            pieces.push(PieceReport {
                label: piece.label.clone(),
                conditions: piece.stratum.describe(s),
                classes: piece.classes.iter().map(|c| c.label().to_string()).collect(),
                a_matrix,
            });
        }
        strata.push(StratumReport {
            name: cs.config.name.clone(),
            conditions: cs.config.describe(s),
            rank: cs.rank,
            constraints: cs.generators.iter().map(|g| s.display(g)).collect(),
            hamiltonian: s.display(&analysis.hamiltonians[i].h),
            consequences: analysis.consequences[i].expressions.iter().map(|c| s.display(c)).collect(),
            s_matrix: matrix(&cl.matrix, s),
            pieces,
        });
    }

    let omega = lagrange_two_form(m).map_err(legendre_error)?;
    let omega = OmegaReport { generic_rank: omega.generic_rank(s), closed: closedness_defects(m, &omega).is_empty() };

    let pieces = analysis.constraint_pieces(model);
    let mut first_class = Vec::new();
    for f in first_class_candidates(model, analysis) {
        let rep = first_class_tangency(&f, &pieces, &ps, s).map_err(core_error)?;
        first_class.push(FirstClassReport {
            function: s.display(&f),
            first_class: rep.pass(),
            pieces: rep
                .pieces
                .iter()
                .map(|p| {
                    let (verdict, detail) = verdict_text(&p.verdict);
                    PieceVerdictReport { piece: p.piece.clone(), verdict, detail }
                })
                .collect(),
        });
        warnings.extend(printed_condition_warnings(model, &f, &pieces)?);
    }

    let mut symmetries = Vec::new();
    for (name, x) in &m.symmetries {
        let killing = matrix(&killing_check(&analysis.hessian, x, &m.coords, s), s);
        let (invariant, momentum, witness) = match noether(m, x) {
            Ok(r) => (true, Some(s.display(&r.momentum)), None),
            Err(DynamicsError::NotInvariant { witness }) => (false, None, Some(s.display(&witness))),
            Err(e) => return Err(core_error(e)),
        };
        symmetries.push(SymmetryReport { name: name.clone(), field: x.describe(s), invariant, momentum, witness, killing });
    }

    let reduction = match &model.chart {
        None => None,
        Some(chart) => {
            let name = model.file.reduction_chart.as_ref().and_then(|c| c.stratum.as_deref());
            let i = analysis.system_index(name)?;
            let graph = &analysis.strata.pieces[i].1.graph;
            let v = reduction_chart_verify(m, &analysis.hamiltonians[i].h, graph, chart).map_err(core_error)?;
            Some(ReductionReport { brackets: v.brackets.iter().map(|b| s.display(b)).collect(), h_reduced: s.display(&v.h_mu) })
        }
    };

    let orbits = if model.orbit_functions.is_empty() {
        None
    } else {
        let r = orbit_report(&pieces, &model.orbit_functions, &ps, s, seed).map_err(core_error)?;
        Some(OrbitSummary {
            orbits: r.orbits.iter().map(|o| OrbitEntry { label: o.label.clone(), dimension: o.dimension }).collect(),
            classes: r
                .classes
                .iter()
                .map(|c| ClassEntry {
                    orbits: c.orbits.clone(),
                    values: c.values.as_ref().map(|v| v.iter().map(|q| s.display(&RationalExpr::constant(q.clone()))).collect()),
                    note: c.note.clone(),
                })
                .collect(),
        })
    };

    if !m.initial_data.is_empty() {
        let idx = analysis.consequences.iter().position(|c| !c.expressions.is_empty());
        if let Some(i) = idx {
            let name = analysis.consequences[i].stratum.clone();
            let rep = initial_data_report(m, &analysis.consequences, Some(&name));
            for (d, hit) in m.initial_data.iter().zip(&rep.declared) {
                if hit.is_none() {
                    warnings.push(Warning::new(
                        "initial-data",
                        "declared initial-data condition is not a derived consequence",
                        &[("stratum", name.clone()), ("condition", s.display(d))],
                    ));
                }
            }
            for c in &rep.unmatched {
                warnings.push(Warning::new(
                    "initial-data",
                    "derived consequence missing from the declared initial-data conditions",
                    &[("stratum", name.clone()), ("consequence", s.display(c))],
                ));
            }
        }
    }
    warnings.extend(extension_template_warnings(model, analysis)?);

    Ok(AnalysisReport {
        coordinates: model.file.coordinates.clone(),
        lagrangian: s.display(&m.lagrangian),
        strata,
        omega,
        first_class,
        symmetries,
        reduction,
        orbits,
        warnings,
    })
}

/// `scale * f + sum_k (sum_v a_kv df/dv) c_k` from the printed template.
pub fn printed_extension(model: &Model, gens: &[RationalExpr], f: &RationalExpr) -> Result<Option<RationalExpr>, CliError> {
    let Some(t) = model.file.known.as_ref().and_then(|k| k.extension_template.as_ref()) else {
        return Ok(None);
    };
    let s = &model.spec.symbols;
    let mut out = &model.parse(&t.scale)? * f;
    for (k, coeffs) in t.coefficients.iter().enumerate() {
        let c = gens.get(k).ok_or_else(|| CliError::Input("extension template has more terms than generators".into()))?;
        let mut factor = RationalExpr::zero();
        for (v, a) in coeffs {
            let var = s.lookup(v).map_err(core_error)?;
            factor = &factor + &(&model.parse(a)? * &f.derivative(var));
        }
        out = &out + &(&factor * c);
    }
    Ok(Some(s.canonical(&out)))
}

/// Printed extension against `scale * f*` for each template function.
pub fn extension_comparison(model: &Model, analysis: &Analysis) -> Result<Vec<(String, String, String, bool)>, CliError> {
    let Some(t) = model.file.known.as_ref().and_then(|k| k.extension_template.as_ref()) else {
        return Ok(Vec::new());
    };
    let s = &model.spec.symbols;
    let dd = analysis.dirac(model, None)?;
    let gens = &analysis.systems[0].generators;
    let scale = model.parse(&t.scale)?;
    let mut out = Vec::new();
    for text in &t.functions {
        let f = model.parse(text)?;
        let printed = printed_extension(model, gens, &f)?.expect("template present");
        let computed = s.canonical(&(&scale * &modify_first_class(&f, &dd, s).map_err(core_error)?));
        out.push((s.display(&f), s.display(&printed), s.display(&computed), printed == computed));
    }
    Ok(out)
}

fn extension_template_warnings(model: &Model, analysis: &Analysis) -> Result<Vec<Warning>, CliError> {
    Ok(extension_comparison(model, analysis)?
        .into_iter()
        .filter(|(.., same)| !same)
        .map(|(f, printed, computed, _)| {
            Warning::new(
                "extension-template",
                "printed first class extension differs from the computed one",
                &[("function", f), ("printed", printed), ("computed", computed)],
            )
        })
        .collect())
}

/// Printed vanishing-derivative conditions against the tangency test on
/// each named stratum.
pub fn printed_condition_verdicts(
    model: &Model,
    f: &RationalExpr,
    pieces: &[dirac_core::legendre::Stratum],
) -> Result<Vec<(String, bool, bool)>, CliError> {
    let Some(k) = &model.file.known else { return Ok(Vec::new()) };
    let m = &model.spec;
    let s = &m.symbols;
    let ps = m.phase_space();
    let mut out = Vec::new();
    for c in &k.printed_conditions {
        let st = pieces
            .iter()
            .find(|p| p.name == c.stratum)
            .ok_or_else(|| CliError::Input(format!("printed condition names unknown stratum {:?}", c.stratum)))?;
        let graph = SubstitutionGraph::build(st, s, &dirac_core::dirac::phase_preference(&ps)).map_err(core_error)?;
        let mut printed = true;
        for v in &c.vanishing_derivatives {
            let var = s.lookup(v).map_err(core_error)?;
            match graph.reduce(&f.derivative(var), s) {
                Ok(r) if s.is_zero(&r) => {}
                _ => printed = false,
            }
        }
        let tangent = first_class_tangency(f, std::slice::from_ref(st), &ps, s).map_err(core_error)?.pass();
        out.push((c.stratum.clone(), printed, tangent));
    }
    Ok(out)
}

fn printed_condition_warnings(model: &Model, f: &RationalExpr, pieces: &[dirac_core::legendre::Stratum]) -> Result<Vec<Warning>, CliError> {
    let s = &model.spec.symbols;
    let word = |b: bool| if b { "first class" } else { "not first class" }.to_string();
    Ok(printed_condition_verdicts(model, f, pieces)?
        .into_iter()
        .filter(|(_, printed, tangent)| printed != tangent)
        .map(|(st, printed, tangent)| {
            Warning::new(
                "printed-condition",
                "printed derivative conditions disagree with the tangency test",
                &[("function", s.display(f)), ("stratum", st), ("printed", word(printed)), ("tangency", word(tangent))],
            )
        })
        .collect())
}

fn render_matrix(out: &mut String, indent: &str, m: &[Vec<String>]) {
    let rows: Vec<String> = m.iter().map(|r| format!("[{}]", r.join(", "))).collect();
    let _ = writeln!(out, "{indent}[{}]", rows.join(", "));
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "coordinates: {}", self.coordinates.join(", "));
        let _ = writeln!(o, "lagrangian: {}", self.lagrangian);
        for st in &self.strata {
            let _ = writeln!(o, "\nstratum {} ({})", st.name, st.conditions);
            let _ = writeln!(o, "  rank: {}", st.rank);
            let _ = writeln!(o, "  constraints: {{{}}}", st.constraints.join(", "));
            let _ = writeln!(o, "  hamiltonian: {}", st.hamiltonian);
            if !st.consequences.is_empty() {
                let _ = writeln!(o, "  consequences: {}", st.consequences.join("; "));
            }
            if !st.s_matrix.is_empty() {
                o.push_str("  S = ");
                render_matrix(&mut o, "", &st.s_matrix);
            }
            for p in &st.pieces {
                let _ = writeln!(o, "  piece {} ({}): {}", p.label, p.conditions, p.classes.join(", "));
                if let Some(a) = &p.a_matrix {
                    o.push_str("    A = ");
                    render_matrix(&mut o, "", a);
                }
            }
        }
        let _ = writeln!(o, "\nomega_l: generic rank {}, {}", self.omega.generic_rank, if self.omega.closed { "closed" } else { "not closed" });
        if !self.first_class.is_empty() {
            let _ = writeln!(o, "\nfirst class tests:");
            for f in &self.first_class {
                let _ = writeln!(o, "  {}: {}", f.function, if f.first_class { "first class" } else { "not first class" });
                for p in &f.pieces {
                    match &p.detail {
                        Some(d) => {
                            let _ = writeln!(o, "    {}: {} ({})", p.piece, p.verdict, d);
                        }
                        None => {
                            let _ = writeln!(o, "    {}: {}", p.piece, p.verdict);
                        }
                    }
                }
            }
        }
        for sym in &self.symmetries {
            let _ = writeln!(o, "\nsymmetry {}: {}", sym.name, sym.field);
            match (&sym.momentum, &sym.witness) {
                (Some(j), _) => {
                    let _ = writeln!(o, "  invariant, momentum {j}");
                }
                (None, Some(w)) => {
                    let _ = writeln!(o, "  not invariant, witness {w}");
                }
                _ => {}
            }
            o.push_str("  Lie derivative of the metric: ");
            render_matrix(&mut o, "", &sym.killing);
        }
        if let Some(r) = &self.reduction {
            let _ = writeln!(o, "\nreduction chart: {{qbar,pbar}} = {}, {{qbar,j}} = {}, {{pbar,j}} = {}", r.brackets[0], r.brackets[1], r.brackets[2]);
            let _ = writeln!(o, "  h_mu = {}", r.h_reduced);
        }
        if let Some(orb) = &self.orbits {
            let _ = writeln!(o, "\norbits: {}", orb.orbits.len());
            for e in &orb.orbits {
                let _ = writeln!(o, "  {} (dimension {})", e.label, e.dimension);
            }
            let _ = writeln!(o, "reduced classes: {}", orb.classes.len());
            for c in &orb.classes {
                let values = c.values.as_ref().map(|v| format!(" values ({})", v.join(", "))).unwrap_or_default();
                let _ = writeln!(o, "  {{{}}}{}: {}", c.orbits.join(", "), values, c.note);
            }
        }
        if !self.warnings.is_empty() {
            let _ = writeln!(o, "\nwarnings:");
            for w in &self.warnings {
                let details: Vec<String> = w.details.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let _ = writeln!(o, "  [{}] {}: {}", w.code, w.message, details.join("; "));
            }
        }
        o
    }
}
