//! The `verify` suite: every `known` entry plus invariant checks on the model.

use std::collections::BTreeMap;

use dirac_core::dirac::{
    dirac_bracket, first_class_tangency, modify_first_class, orbit_report, phase_preference, pieces_of, ConstraintClass,
    DiracData,
};
use dirac_core::dynamics::{conserved_drift, hamiltonian_system, integrate, killing_check, noether, reduction_chart_verify};
use dirac_core::legendre::{closedness_defects, lagrange_two_form};
use dirac_core::phase::{PhaseSpace, SubstitutionGraph};
use dirac_core::sample::{rng, sample_point, SampleRng};
use dirac_core::symexpr::{RationalExpr, Symbols, Var};
use rand::Rng;
use serde::Serialize;

use crate::analysis::{core_error, Analysis};
use crate::commands::{Format, Outcome};
use crate::error::CliError;
use crate::model::Model;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, result: Result<String, String>) -> Check {
    match result {
        Ok(detail) => Check { name: name.into(), passed: true, detail },
        Err(detail) => Check { name: name.into(), passed: false, detail },
    }
}

/// Random pairs drawn for the Jacobi and weak-equality suites.
const RANDOM_CASES: usize = 20;
const DRIFT_TOL: f64 = 1e-6;

fn random_poly(vars: &[Var], r: &mut SampleRng) -> RationalExpr {
    let mut out = RationalExpr::zero();
    for _ in 0..r.gen_range(1..=3) {
        let mut term = RationalExpr::int(r.gen_range(1..=3) * if r.gen_bool(0.5) { 1 } else { -1 });
        for _ in 0..r.gen_range(0..=2) {
            let v = vars[r.gen_range(0..vars.len())];
            term = &term * &RationalExpr::var(v);
        }
        out = &out + &term;
    }
    out
}

fn same_set(s: &Symbols, got: &[RationalExpr], want: &[RationalExpr]) -> bool {
    let proportional = |a: &RationalExpr, b: &RationalExpr| {
        a.try_div(b).ok().map(|q| s.canonical(&q)).is_some_and(|q| q.is_constant() && !q.is_zero())
    };
    got.len() == want.len() && want.iter().all(|w| got.iter().any(|g| proportional(g, w)))
}

pub fn run_checks(model: &Model, seed: u64) -> Result<Vec<Check>, CliError> {
    let m = &model.spec;
    let s = &m.symbols;
    let ps = m.phase_space();
    let analysis = Analysis::run(model)?;
    let mut out = Vec::new();
    let total: usize = analysis.systems.iter().map(|c| c.generators.len()).sum();
    out.push(check("pushforward", Ok(format!("{} strata, {total} primary constraints", analysis.systems.len()))));

    if let Some(k) = &model.file.known {
        for (name, want) in &k.constraints {
            let r = analysis.system_index(Some(name)).map_err(|e| e.to_string()).and_then(|i| {
                let want: Vec<RationalExpr> = want.iter().map(|w| model.parse(w).expect("checked at load")).collect();
                let got = &analysis.systems[i].generators;
                let shown: Vec<String> = got.iter().map(|g| s.display(g)).collect();
                if same_set(s, got, &want) {
                    Ok(format!("{{{}}}", shown.join(", ")))
                } else {
                    Err(format!("found {{{}}}", shown.join(", ")))
                }
            });
            out.push(check(format!("constraints on {name}"), r));
        }
        for (name, want) in &k.hamiltonians {
            let want = model.parse(want)?;
            let r = match analysis.hamiltonian(name) {
                None => Err(format!("no rank stratum named {name:?}")),
                Some(h) if s.equal(h, &want) => Ok(s.display(h)),
                Some(h) => Err(format!("found {}", s.display(h))),
            };
            out.push(check(format!("hamiltonian on {name}"), r));
        }
        for b in &k.brackets {
            let (f, g, want) = (model.parse(&b.f)?, model.parse(&b.g)?, model.parse(&b.value)?);
            let label = format!("{}{{{}, {}}}", if b.dirac { "dirac " } else { "" }, b.f, b.g);
            let r = if b.dirac {
                let dd = analysis.dirac(model, None)?;
                let v = dirac_bracket(&f, &g, &dd, s).map_err(core_error)?;
                let diff = dd.reduce(&(&v - &want), s).map_err(core_error)?;
                if s.is_zero(&diff) { Ok(s.display(&s.canonical(&v))) } else { Err(format!("found {}", s.display(&s.canonical(&v)))) }
            } else {
                let v = ps.bracket(&f, &g, s).map_err(core_error)?;
                if s.equal(&v, &want) { Ok(s.display(&v)) } else { Err(format!("found {}", s.display(&v))) }
            };
            out.push(check(label, r));
        }
        for md in &k.modified {
            let (f, want) = (model.parse(&md.f)?, model.parse(&md.value)?);
            let dd = analysis.dirac(model, None)?;
            let v = modify_first_class(&f, &dd, s).map_err(core_error)?;
            let r = if s.equal(&v, &want) { Ok(s.display(&v)) } else { Err(format!("found {}", s.display(&v))) };
            out.push(check(format!("modified {}", md.f), r));
        }
        let pieces = analysis.constraint_pieces(model);
        for (texts, expect) in [(&k.first_class, true), (&k.not_first_class, false)] {
            for t in texts {
                let rep = first_class_tangency(&model.parse(t)?, &pieces, &ps, s).map_err(core_error)?;
                let r = match (rep.pass(), rep.first_failure()) {
                    (got, _) if got == expect && got => Ok(format!("tangent on {} pieces", rep.pieces.len())),
                    (got, Some(f)) if got == expect => Ok(format!("leaves {}", f.piece)),
                    (_, Some(f)) => Err(format!("leaves {}", f.piece)),
                    _ => Err("tangent on every piece".into()),
                };
                out.push(check(format!("{} {t}", if expect { "first class" } else { "not first class" }), r));
            }
        }
        if k.orbits.is_some() || k.reduced_classes.is_some() {
            let rep = orbit_report(&pieces, &model.orbit_functions, &ps, s, seed).map_err(core_error)?;
            if let Some(n) = k.orbits {
                let got = rep.orbits.len();
                out.push(check("orbit count", if got == n { Ok(got.to_string()) } else { Err(format!("found {got}, expected {n}")) }));
            }
            if let Some(n) = k.reduced_classes {
                let got = rep.classes.len();
                out.push(check("reduced classes", if got == n { Ok(got.to_string()) } else { Err(format!("found {got}, expected {n}")) }));
            }
        }
    }

    out.push(check("jacobi identity", jacobi_suite(&ps, s, seed)));
    let omega = lagrange_two_form(m).map_err(crate::analysis::legendre_error)?;
    let defects = closedness_defects(m, &omega);
    out.push(check("omega_l closed", if defects.is_empty() { Ok(String::new()) } else { Err(format!("{} defects", defects.len())) }));

    for (i, cs) in analysis.systems.iter().enumerate() {
        for piece in &analysis.classifications[i].pieces {
            if !piece.classes.contains(&ConstraintClass::Second) {
                continue;
            }
            let dd = DiracData::from_piece(piece, &cs.generators, &ps, s).map_err(core_error)?;
            out.push(check(format!("A*S = I on {}", piece.label), inverse_check(&dd, s)));
            out.push(check(format!("f* first class on {}", piece.label), dirac_suite(&dd, &cs.generators, &ps, s, seed)));
        }
    }

    for (name, x) in &m.symmetries {
        let r = match noether(m, x) {
            Ok(r) => Ok(format!("momentum {}", s.display(&r.momentum))),
            Err(e) => Err(e.to_string()),
        };
        out.push(check(format!("noether {name}"), r));
        let lie = killing_check(&analysis.hessian, x, &m.coords, s);
        let r = if lie.entries().all(|e| s.is_zero(e)) { Ok(String::new()) } else { Err("Lie derivative of the metric is nonzero".into()) };
        out.push(check(format!("killing {name}"), r));
    }

    if let Some(chart) = &model.chart {
        let name = model.file.reduction_chart.as_ref().and_then(|c| c.stratum.as_deref());
        let i = analysis.system_index(name)?;
        let graph = &analysis.strata.pieces[i].1.graph;
        let r = reduction_chart_verify(m, &analysis.hamiltonians[i].h, graph, chart)
            .map(|v| format!("h_mu = {}", s.display(&v.h_mu)))
            .map_err(|e| e.to_string());
        out.push(check("reduction chart", r));
    }

    out.push(check("hamiltonian drift", drift_suite(model, &analysis, seed)?));
    Ok(out)
}

fn jacobi_suite(ps: &PhaseSpace, s: &Symbols, seed: u64) -> Result<String, String> {
    let vars = ps.vars();
    let mut r = rng(seed);
    let br = |a: &RationalExpr, b: &RationalExpr| ps.bracket(a, b, s).map_err(|e| e.to_string());
    for _ in 0..RANDOM_CASES {
        let (f, g, h) = (random_poly(&vars, &mut r), random_poly(&vars, &mut r), random_poly(&vars, &mut r));
        let j = &(&br(&f, &br(&g, &h)?)? + &br(&g, &br(&h, &f)?)?) + &br(&h, &br(&f, &g)?)?;
        if !s.is_zero(&j) {
            return Err(format!("fails for {}, {}, {}", s.display(&f), s.display(&g), s.display(&h)));
        }
    }
    Ok(format!("{RANDOM_CASES} triples"))
}

fn inverse_check(dd: &DiracData, s: &Symbols) -> Result<String, String> {
    let res = dd.inverse_residual(s).map_err(|e| e.to_string())?;
    if res.entries().all(|e| s.is_zero(e)) {
        Ok(String::new())
    } else {
        Err("A*S - I does not vanish".into())
    }
}

fn dirac_suite(dd: &DiracData, gens: &[RationalExpr], ps: &PhaseSpace, s: &Symbols, seed: u64) -> Result<String, String> {
    let vars = ps.vars();
    let mut r = rng(seed.wrapping_add(1));
    let e = |x: dirac_core::dirac::DiracError| x.to_string();
    let weak_zero = |x: &RationalExpr| dd.reduce(x, s).map(|v| s.is_zero(&v)).map_err(e);
    let mut fns: Vec<RationalExpr> = vars.iter().map(|&v| RationalExpr::var(v)).collect();
    fns.extend((0..RANDOM_CASES).map(|_| random_poly(&vars, &mut r)));
    let mut stars = Vec::new();
    for f in &fns {
        let fs = modify_first_class(f, dd, s).map_err(e)?;
        for c in gens {
            if !weak_zero(&ps.bracket(&fs, c, s).map_err(|x| x.to_string())?)? {
                return Err(format!("{{{}*, {}}} does not vanish weakly", s.display(f), s.display(c)));
            }
        }
        stars.push(fs);
    }
    for k in 0..RANDOM_CASES {
        let (i, j) = (vars.len() + k, vars.len() + (k + 1) % RANDOM_CASES);
        let lhs = ps.bracket(&stars[i], &stars[j], s).map_err(|x| x.to_string())?;
        let rhs = dirac_bracket(&fns[i], &fns[j], dd, s).map_err(e)?;
        if !weak_zero(&(&lhs - &rhs))? {
            return Err(format!("{{f*, g*}} differs from the Dirac bracket for {}, {}", s.display(&fns[i]), s.display(&fns[j])));
        }
    }
    Ok(format!("{} functions, {RANDOM_CASES} pairs", fns.len()))
}

/// Short Hamiltonian flows from sampled points of each constraint piece.
fn drift_suite(model: &Model, analysis: &Analysis, seed: u64) -> Result<Result<String, String>, CliError> {
    let m = &model.spec;
    let s = &m.symbols;
    let ps = m.phase_space();
    let pref = phase_preference(&ps);
    let vars = ps.vars();
    let mut r = rng(seed.wrapping_add(2));
    let mut constants = BTreeMap::new();
    s.bind_algebraic(&mut constants);
    let mut runs = 0;
    for piece in pieces_of(&analysis.constraint_pieces(model), s) {
        let graph = SubstitutionGraph::build(&piece, s, &pref).map_err(core_error)?;
        let Some(point) = sample_point(&piece, &graph, s, &vars, &BTreeMap::new(), &mut r) else { continue };
        let Some((config, _)) = analysis.strata.locate(s, &point, dirac_core::legendre::TAU_EQ) else { continue };
        let Some(h) = analysis.hamiltonian(&config.name) else { continue };
        let sys = hamiltonian_system(m, h, &piece, &constants).map_err(core_error)?;
        let x0: Vec<f64> = sys.vars.iter().map(|v| point[v]).collect();
        let Ok(traj) = integrate(&sys, &x0, 0.5, 1e-3) else { continue };
        let drift = conserved_drift(&traj, h, s, &constants).map_err(core_error)?;
        if drift >= DRIFT_TOL {
            return Ok(Err(format!("drift {drift:.3e} on {}", piece.name)));
        }
        runs += 1;
    }
    Ok(Ok(format!("{runs} pieces")))
}

pub fn verify(model: &Model, format: Format, seed: u64) -> Result<Outcome, CliError> {
    let checks = run_checks(model, seed)?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&checks).expect("checks serialize") + "\n",
        Format::Text => checks
            .iter()
            .map(|c| {
                let status = if c.passed { "ok  " } else { "FAIL" };
                if c.detail.is_empty() { format!("{status} {}\n", c.name) } else { format!("{status} {}: {}\n", c.name, c.detail) }
            })
            .collect(),
    };
    let error = checks.iter().find(|c| !c.passed).map(|c| CliError::Verify(format!("{}: {}", c.name, c.detail)));
    Ok(Outcome { stdout: text, error })
}
