//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;

use dirac_core::dirac::{
    dirac_bracket, first_class_tangency, modify_first_class, orbit_report, ConstraintClass, DiracData, Tangency,
};
use dirac_core::dynamics::{
    euler_lagrange_system, flow_tangency_oracle, gauge_family, hamiltonian_system, integrate, killing_check, noether,
    reach_connect, stencil_el_residual, type_one_solution, DEFAULT_SEGMENTS,
};
use dirac_core::legendre::{energy, ModelSpec};
use dirac_core::phase::VectorField;
use dirac_core::sample::{rng, SampleRng};
use dirac_core::symexpr::{acceleration_name, velocity_name, RationalExpr, Symbols, Var};
use dirac_mech::analysis::Analysis;
use dirac_mech::commands::{integrate as cli_integrate, Flow, Format, IntegrateArgs};
use dirac_mech::model::Model;
use dirac_mech::report::{build_report, AnalysisReport};
use rand::Rng;

const EXACT_FLOW_TOL: f64 = 1e-12;
const DRIFT_TOL: f64 = 1e-6;
const CLOSED_FORM_TOL: f64 = 1e-5;
const QMIN_SLACK: f64 = 1e-5;
const ORDER_RATIO: (f64, f64) = (12.0, 20.0);
const NOETHER_TOL: f64 = 1e-8;
const REACH_ENDPOINT_TOL: f64 = 1e-8;
const REACH_AREA_TOL: f64 = 1e-10;
const REACH_EL_TOL: f64 = 1e-6;
const GAUGE_EL_TOL: f64 = 1e-5;
const ORACLE_POINTS: usize = 50;
const ORACLE_T: f64 = 1.0;
const ORACLE_DT: f64 = 1e-2;
const ORACLE_TOL: f64 = 1e-6;
const RANDOM_PAIRS: usize = 100;
const SEED: u64 = 0;

type Verdict = Result<String, String>;

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn load(name: &str) -> Model {
    Model::load(&example(name)).expect("shipped model loads")
}

fn expr(m: &Model, text: &str) -> RationalExpr {
    m.parse(text).expect("test expression parses")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn same_exprs(s: &Symbols, got: &[RationalExpr], want: &[RationalExpr]) -> bool {
    got.len() == want.len() && want.iter().all(|w| got.iter().any(|g| s.equal(g, w)))
}

fn show(s: &Symbols, es: &[RationalExpr]) -> String {
    let v: Vec<String> = es.iter().map(|e| s.display(e)).collect();
    format!("{{{}}}", v.join(", "))
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("dirac-mech-acceptance-{}-{name}", std::process::id()))
}

/// Columns of a CSV written by `integrate`.
fn read_csv(path: &Path) -> BTreeMap<String, Vec<f64>> {
    let text = std::fs::read_to_string(path).expect("csv written");
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().expect("header").split(',').map(str::to_string).collect();
    let mut cols: BTreeMap<String, Vec<f64>> = header.iter().map(|h| (h.clone(), Vec::new())).collect();
    for line in lines {
        for (h, v) in header.iter().zip(line.split(',')) {
            cols.get_mut(h).unwrap().push(v.parse().expect("numeric cell"));
        }
    }
    cols
}

fn run_integrate(model: &Model, flow: Flow, init: &str, t: f64, dt: f64, out: &Path) -> Result<BTreeMap<String, Vec<f64>>, String> {
    let init = vec![init.to_string()];
    let args = IntegrateArgs { flow, init: &init, t, dt, stratum: None, out: Some(out) };
    let o = cli_integrate(model, &args, Format::Text).map_err(|e| e.render())?;
    if let Some(e) = o.error {
        return Err(e.render());
    }
    Ok(read_csv(out))
}

fn random_poly(vars: &[Var], r: &mut SampleRng) -> RationalExpr {
    let mut out = RationalExpr::zero();
    for _ in 0..r.gen_range(1..=3) {
        let mut term = RationalExpr::int(r.gen_range(-3..=3));
        for _ in 0..r.gen_range(0..=3) {
            term = &term * &RationalExpr::var(vars[r.gen_range(0..vars.len())]);
        }
        out = &out + &term;
    }
    out
}

fn second_class_data(model: &Model, analysis: &Analysis) -> (DiracData, Vec<RationalExpr>) {
    let cs = &analysis.systems[0];
    let piece = analysis.classifications[0]
        .pieces
        .iter()
        .find(|p| p.classes.iter().all(|c| *c == ConstraintClass::Second))
        .expect("second class piece");
    let dd = DiracData::from_piece(piece, &cs.generators, &model.spec.phase_space(), &model.spec.symbols).unwrap();
    (dd, cs.generators.clone())
}

fn c1_bracket_anchor() -> Verdict {
    let a = load("nonintegrable_a.json");
    let s = &a.spec.symbols;
    let b = a.spec.phase_space().bracket(&expr(&a, "p_y"), &expr(&a, "p_x + y*p_z"), s).unwrap();
    ensure(b == s.canonical(&expr(&a, "-p_z")), || format!("got {}", s.display(&b)))?;
    Ok(format!("{{p_y, p_x + y*p_z}} = {}", s.display(&b)))
}

fn c2_constraints() -> Verdict {
    let a = load("nonintegrable_a.json");
    let aa = Analysis::run(&a).map_err(|e| e.render())?;
    let s = &a.spec.symbols;
    ensure(aa.systems.len() == 1, || format!("{} strata for (a)", aa.systems.len()))?;
    let want = [expr(&a, "p_y"), expr(&a, "p_x + y*p_z")];
    let got = &aa.systems[0].generators;
    ensure(same_exprs(s, got, &want), || format!("(a) found {}", show(s, got)))?;

    let b = load("nonconstant_rank_b.json");
    let ab = Analysis::run(&b).map_err(|e| e.render())?;
    let s = &b.spec.symbols;
    let table: [(&str, &[&str]); 4] =
        [("x!=0,y!=0", &[]), ("x=0,y!=0", &["p_y"]), ("x!=0,y=0", &["p_x"]), ("x=0,y=0", &["p_x", "p_y"])];
    ensure(ab.systems.len() == 4, || format!("{} strata for (b)", ab.systems.len()))?;
    for (name, want) in table {
        let i = ab.system_index(Some(name)).map_err(|e| e.render())?;
        let want: Vec<RationalExpr> = want.iter().map(|w| expr(&b, w)).collect();
        let got = &ab.systems[i].generators;
        ensure(same_exprs(s, got, &want), || format!("(b) on {name} found {}", show(s, got)))?;
    }
    Ok("(a) {p_y, p_x + y*p_z}; (b) {}, {p_y}, {p_x}, {p_x, p_y}".into())
}

/// `h(q, p(q, v)) - e` on the rank stratum, reduced by its equalities.
fn fiber_residual(m: &ModelSpec, analysis: &Analysis, i: usize) -> RationalExpr {
    let s = &m.symbols;
    let h = &analysis.hamiltonians[i].h;
    let pulled = s.substitute(h, &m.momentum_bindings().unwrap()).unwrap();
    let graph = &analysis.strata.pieces[i].1.graph;
    graph.reduce(&(&pulled - &energy(m).unwrap()), s).unwrap()
}

fn c3_pushforward() -> Verdict {
    let a = load("nonintegrable_a.json");
    let aa = Analysis::run(&a).map_err(|e| e.render())?;
    let s = &a.spec.symbols;
    ensure(s.equal(&aa.hamiltonians[0].h, &expr(&a, "p_z^2/2")), || format!("(a) h = {}", s.display(&aa.hamiltonians[0].h)))?;
    ensure(s.is_zero(&fiber_residual(&a.spec, &aa, 0)), || "(a) h(p(v)) - e does not vanish".into())?;

    let b = load("nonconstant_rank_b.json");
    let ab = Analysis::run(&b).map_err(|e| e.render())?;
    let s = &b.spec.symbols;
    let h = ab.hamiltonian("x!=0,y!=0").ok_or("no open stratum")?;
    let want = expr(&b, "p_x^2/(2*y^2) + p_y^2/(2*x^2)");
    ensure(s.equal(h, &want), || format!("(b) h = {}", s.display(h)))?;
    for i in 0..ab.hamiltonians.len() {
        let r = fiber_residual(&b.spec, &ab, i);
        ensure(s.is_zero(&r), || format!("(b) residual {} on {}", s.display(&r), ab.hamiltonians[i].stratum.name))?;
    }
    Ok("h = p_z^2/2; h = p_x^2/(2y^2) + p_y^2/(2x^2); fiber residual 0 on every stratum".into())
}

fn c4_dirac() -> Verdict {
    let a = load("nonintegrable_a.json");
    let aa = Analysis::run(&a).map_err(|e| e.render())?;
    let s = &a.spec.symbols;
    let ps = a.spec.phase_space();
    let (dd, gens) = second_class_data(&a, &aa);
    let prod = dd.a.mul(&dd.s).unwrap();
    for i in 0..prod.rows() {
        for j in 0..prod.cols() {
            let want = RationalExpr::int((i == j) as i64);
            ensure(s.equal(prod.get(i, j), &want), || format!("(A S)[{i}][{j}] = {}", s.display(prod.get(i, j))))?;
        }
    }
    for f in ["x", "y", "z", "x*z", "p_y*y"] {
        let fs = modify_first_class(&expr(&a, f), &dd, s).unwrap();
        for c in &gens {
            let r = dd.reduce(&ps.bracket(&fs, c, s).unwrap(), s).unwrap();
            ensure(s.is_zero(&r), || format!("{{{f}*, {}}} = {}", s.display(c), s.display(&r)))?;
        }
    }
    let vars = ps.vars();
    let mut r = rng(SEED);
    for k in 0..RANDOM_PAIRS {
        let (f, g) = (random_poly(&vars, &mut r), random_poly(&vars, &mut r));
        let lhs = ps.bracket(&modify_first_class(&f, &dd, s).unwrap(), &modify_first_class(&g, &dd, s).unwrap(), s).unwrap();
        let rhs = dirac_bracket(&f, &g, &dd, s).unwrap();
        let diff = dd.reduce(&(&lhs - &rhs), s).unwrap();
        ensure(s.is_zero(&diff), || format!("pair {k}: {} and {}", s.display(&f), s.display(&g)))?;
    }
    Ok(format!("A S = I; 5 modified functions first class; {RANDOM_PAIRS} seeded pairs weakly equal"))
}

fn c5_extension_template() -> Verdict {
    let a = load("nonintegrable_a.json");
    let aa = Analysis::run(&a).map_err(|e| e.render())?;
    let s = &a.spec.symbols;
    let (dd, _) = second_class_data(&a, &aa);
    let v = |n: &str| s.lookup(n).unwrap();
    let (c1, c2) = (expr(&a, "p_y"), expr(&a, "p_x + y*p_z"));
    let (y, pz) = (expr(&a, "y"), expr(&a, "p_z"));
    let mut mismatches = Vec::new();
    for f1 in ["1", "x", "y", "z", "p_y", "p_z"] {
        let f = expr(&a, f1);
        let d = |n: &str| f.derivative(v(n));
        let drift = &(&d("x") + &(&y * &d("z"))) - &(&pz * &d("p_y"));
        let printed = s.canonical(&(&(&(&pz * &f) + &(&d("y") * &c1)) - &(&drift * &c2)));
        let computed = s.canonical(&modify_first_class(&(&pz * &f), &dd, s).unwrap());
        if printed != computed {
            mismatches.push(format!("f1={f1}: printed {} vs computed {}", s.display(&printed), s.display(&computed)));
        }
    }
    ensure(mismatches.is_empty(), || mismatches.join("; "))?;
    Ok("closed form reproduced for 1, x, y, z, p_y, p_z".into())
}

/// Symbolic per-piece verdicts against the flow oracle; returns the symbolic
/// pass flag.
fn tangency_agrees(model: &Model, analysis: &Analysis, f: &str, seed: u64) -> Result<bool, String> {
    let s = &model.spec.symbols;
    let ps = model.spec.phase_space();
    let pieces = analysis.constraint_pieces(model);
    let fe = expr(model, f);
    let sym = first_class_tangency(&fe, &pieces, &ps, s).unwrap();
    let oracle = flow_tangency_oracle(&fe, &pieces, &ps, s, seed, ORACLE_POINTS, ORACLE_T, ORACLE_DT, ORACLE_TOL).unwrap();
    for p in &sym.pieces {
        let o = oracle.iter().find(|o| o.piece == p.piece).ok_or_else(|| format!("oracle skipped {}", p.piece))?;
        ensure(o.points == ORACLE_POINTS, || format!("{f} on {}: only {} sampled points", p.piece, o.points))?;
        let symbolic = match p.verdict {
            Tangency::Tangent => true,
            Tangency::Transverse { .. } => false,
            Tangency::Undefined { ref reason } => return Err(format!("{f} undefined on {}: {reason}", p.piece)),
        };
        ensure(o.tangent == symbolic, || format!("{f} on {}: symbolic {symbolic}, oracle residual {:.3e}", p.piece, o.max_residual))?;
    }
    Ok(sym.pass())
}

fn c6_first_class() -> Verdict {
    let a = load("nonintegrable_a.json");
    let aa = Analysis::run(&a).map_err(|e| e.render())?;
    ensure(tangency_agrees(&a, &aa, "p_z^2/2", SEED)?, || "h fails in (a)".into())?;
    for f in ["x", "y", "z"] {
        ensure(!tangency_agrees(&a, &aa, f, SEED)?, || format!("{f} passes in (a)"))?;
    }
    let b = load("nonconstant_rank_b.json");
    let ab = Analysis::run(&b).map_err(|e| e.render())?;
    let pieces = dirac_core::dirac::pieces_of(&ab.constraint_pieces(&b), &b.spec.symbols);
    ensure(pieces.len() == 9, || format!("{} pieces in (b)", pieces.len()))?;
    ensure(tangency_agrees(&b, &ab, "x*p_x - y*p_y", SEED)?, || "j fails in (b)".into())?;
    let xr = first_class_tangency(&expr(&b, "x"), &ab.constraint_pieces(&b), &b.spec.phase_space(), &b.spec.symbols).unwrap();
    let axis = xr.pieces.iter().any(|p| p.piece.starts_with("y=0") && p.verdict != Tangency::Tangent);
    ensure(axis, || "x does not fail on an axis piece".into())?;
    ensure(!tangency_agrees(&b, &ab, "x", SEED)?, || "x passes in (b)".into())?;
    Ok(format!("symbolic and flow oracle agree ({ORACLE_POINTS} points, T = {ORACLE_T}) on every piece"))
}

fn c7_orbits() -> Verdict {
    let b = load("nonconstant_rank_b.json");
    let ab = Analysis::run(&b).map_err(|e| e.render())?;
    let rep = orbit_report(&ab.constraint_pieces(&b), &b.orbit_functions, &b.spec.phase_space(), &b.spec.symbols, SEED).unwrap();
    ensure(rep.orbits.len() == 9, || format!("{} orbits", rep.orbits.len()))?;
    let quadrants = rep.classes.iter().filter(|c| c.orbits.len() == 1 && c.orbits[0].starts_with("open[")).count();
    let merged: Vec<_> = rep.classes.iter().filter(|c| c.orbits.len() > 1).collect();
    ensure(rep.classes.len() == 5 && quadrants == 4 && merged.len() == 1 && merged[0].orbits.len() == 5, || {
        format!("{} classes, {quadrants} quadrant classes, {} merged", rep.classes.len(), merged.len())
    })?;
    Ok("9 orbits; 5 reduced classes (4 quadrants + 1 point)".into())
}

fn c8_flow_a() -> Verdict {
    let a = load("nonintegrable_a.json");
    let out = tmp("a.csv");
    let c = run_integrate(&a, Flow::Hamiltonian, "x=1,y=2,z=3,p_z=0.5", 2.0, 1e-3, &out)?;
    let mut worst: f64 = 0.0;
    for (k, &t) in c["t"].iter().enumerate() {
        let want = [("x", 1.0), ("y", 2.0), ("z", 3.0 + 0.5 * t), ("p_x", -1.0), ("p_y", 0.0), ("p_z", 0.5)];
        for (n, w) in want {
            worst = worst.max((c[n][k] - w).abs());
        }
    }
    let _ = std::fs::remove_file(out);
    ensure(worst < EXACT_FLOW_TOL, || format!("max error {worst:.3e}"))?;
    Ok(format!("max error {worst:.3e} over T = 2"))
}

/// `qbar(t)^2 = 2 h (t - t0)^2 + mu^2 / (8 h)` with `t0 = -qbar0 pbar0 / (2 h)`.
fn radial(h: f64, mu: f64, q0: f64, p0: f64, t: f64) -> f64 {
    let t0 = -q0 * p0 / (2.0 * h);
    (2.0 * h * (t - t0).powi(2) + mu * mu / (8.0 * h)).sqrt()
}

fn c9_flow_b() -> Verdict {
    let b = load("nonconstant_rank_b.json");
    let out = tmp("b.csv");
    let c = run_integrate(&b, Flow::Hamiltonian, "x=1,y=1,p_x=1,p_y=0", 5.0, 1e-3, &out)?;
    let _ = std::fs::remove_file(out);
    ensure((c["t"].last().unwrap() - 5.0).abs() < 1e-12, || "run stopped early".into())?;
    let drift = |n: &str| c[n].iter().map(|v| (v - c[n][0]).abs()).fold(0.0, f64::max);
    let (dh, dj) = (drift("h"), drift("j_scaling"));
    ensure(dh < DRIFT_TOL && dj < DRIFT_TOL, || format!("drift h {dh:.3e}, j {dj:.3e}"))?;
    // (x, y, p_x, p_y) = (1, 1, 1, 0): h = 1/2, mu = j = 1, qbar0 = pbar0 = 1/sqrt(2).
    let (h, mu) = (0.5, 1.0);
    let (q0, p0) = (c["qbar"][0], c["pbar"][0]);
    let dev = c["t"].iter().zip(&c["qbar"]).map(|(&t, q)| (q - radial(h, mu, q0, p0, t)).abs()).fold(0.0, f64::max);
    ensure(dev < CLOSED_FORM_TOL, || format!("closed form deviation {dev:.3e}"))?;
    let qmin = c["qbar"].iter().copied().fold(f64::INFINITY, f64::min);
    let bound = mu / (8.0 * h).sqrt();
    ensure(qmin >= bound - QMIN_SLACK, || format!("min qbar {qmin} below {bound}"))?;

    let ab = Analysis::run(&b).map_err(|e| e.render())?;
    let m = &b.spec;
    let open = ab.constraint_pieces(&b).into_iter().find(|p| p.name == "open").unwrap();
    let sys = hamiltonian_system(m, ab.hamiltonian("x!=0,y!=0").unwrap(), &open, &BTreeMap::new()).unwrap();
    let end = |dt: f64| integrate(&sys, &[1.0, 1.0, 1.0, 0.0], 5.0, dt).unwrap().last_state().to_vec();
    let reference = end(1e-4);
    let err = |st: Vec<f64>| st.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ratio = err(end(0.1)) / err(end(0.05));
    ensure((ORDER_RATIO.0..=ORDER_RATIO.1).contains(&ratio), || format!("order ratio {ratio:.2}"))?;
    Ok(format!("drift h {dh:.1e}, j {dj:.1e}; closed form {dev:.1e}; min qbar {qmin:.6}; order ratio {ratio:.2}"))
}

/// `X(l)` prolonged to velocities, computed from components.
fn lie_of_lagrangian(m: &ModelSpec, x: &VectorField) -> RationalExpr {
    let s = &m.symbols;
    let l = &m.lagrangian;
    let mut out = RationalExpr::zero();
    for (i, &q) in m.coords.iter().enumerate() {
        let xi = x.component(q);
        out = &out + &(&xi * &l.derivative(q));
        let mut vdot = RationalExpr::zero();
        for (j, &qj) in m.coords.iter().enumerate() {
            vdot = &vdot + &(&RationalExpr::var(m.velocities[j]) * &xi.derivative(qj));
        }
        out = &out + &(&vdot * &l.derivative(m.velocities[i]));
    }
    s.canonical(&out)
}

fn c10_noether() -> Verdict {
    let mut fields = 0;
    for name in ["nonintegrable_a.json", "nonconstant_rank_b.json"] {
        let model = load(name);
        for (sym, x) in &model.spec.symmetries {
            let lie = lie_of_lagrangian(&model.spec, x);
            ensure(lie.is_zero(), || format!("{sym}: X(l) = {}", model.spec.symbols.display(&lie)))?;
            noether(&model.spec, x).map_err(|e| format!("{sym}: {e}"))?;
            fields += 1;
        }
    }
    ensure(fields == 3, || format!("{fields} symmetry fields"))?;
    let a = load("nonintegrable_a.json");
    let m = &a.spec;
    let traj = type_one_solution(m, f64::cos, |t| -t.sin(), f64::sin, f64::cos, 3.0, 3000).map_err(|e| e.to_string())?;
    let pb = m.momentum_bindings().unwrap();
    let mut worst: f64 = 0.0;
    for n in ["p_x", "p_z"] {
        let p = &pb[&m.symbols.lookup(n).unwrap()];
        let vals: Vec<f64> = (0..traj.len()).map(|k| m.symbols.eval(p, &traj.point(k)).unwrap()).collect();
        let drift = vals.iter().map(|v| (v - vals[0]).abs()).fold(0.0, f64::max);
        let size = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        ensure(drift < NOETHER_TOL && size < NOETHER_TOL, || format!("{n}: drift {drift:.3e}, max |value| {size:.3e}"))?;
        worst = worst.max(size);
    }
    Ok(format!("X(l) = 0 for 3 fields; type-1 p_x, p_z within {worst:.1e} of 0"))
}

fn c11_killing() -> Verdict {
    let b = load("nonconstant_rank_b.json");
    let m = &b.spec;
    let s = &m.symbols;
    let (_, x) = &m.symmetries[0];
    let n = m.coords.len();
    let g = |i: usize, j: usize| m.lagrangian.derivative(m.velocities[i]).derivative(m.velocities[j]);
    let mut components = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut e = RationalExpr::zero();
            for k in 0..n {
                let xk = x.component(m.coords[k]);
                e = &e + &(&xk * &g(i, j).derivative(m.coords[k]));
                e = &e + &(&g(k, j) * &xk.derivative(m.coords[i]));
                e = &e + &(&g(i, k) * &xk.derivative(m.coords[j]));
            }
            components.push(s.canonical(&e));
        }
    }
    ensure(components.len() == 3, || format!("{} components", components.len()))?;
    ensure(components.iter().all(RationalExpr::is_zero), || format!("components {}", show(s, &components)))?;
    let hess = dirac_core::legendre::velocity_hessian(m).unwrap();
    let lib = killing_check(&hess, x, &m.coords, s);
    ensure(lib.entries().all(|e| s.is_zero(e)), || "killing_check disagrees".into())?;
    Ok("xx, xy, yy components vanish".into())
}

fn c12_reach() -> Verdict {
    let a = load("nonintegrable_a.json");
    let el = euler_lagrange_system(&a.spec).unwrap();
    let target = [0.0, 0.0, 5.0, 0.0, 1.0, 0.0];
    let curve = reach_connect(&a.spec, &el, [0.0, 0.0, 0.0, 1.0, 0.0, 0.0], target, DEFAULT_SEGMENTS, 1001).map_err(|e| e.to_string())?;
    let c = &curve.certificate;
    let last = curve.trajectory.last_state();
    let endpoint = last.iter().zip(target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(endpoint < REACH_ENDPOINT_TOL, || format!("endpoint error {endpoint:.3e}"))?;
    ensure(c.area_residual < REACH_AREA_TOL, || format!("area residual {:.3e}", c.area_residual))?;
    ensure(c.max_el_residual < REACH_EL_TOL, || format!("EL residual {:.3e}", c.max_el_residual))?;
    let col = |n: &str| curve.trajectory.column(n).unwrap();
    let (y, xd, zd) = (col("y"), col("x_dot"), col("z_dot"));
    let membership = y.iter().zip(&xd).zip(&zd).map(|((y, xd), zd)| (zd - y * xd).abs()).fold(0.0, f64::max);
    ensure(membership < 1e-12, || format!("z_dot - y x_dot reaches {membership:.3e}"))?;
    Ok(format!("endpoint {endpoint:.1e}, area residual {:.1e}, EL residual {:.1e}", c.area_residual, c.max_el_residual))
}

fn c13_gauge() -> Verdict {
    let gm = load("gauge_rank2.json");
    let m = &gm.spec;
    let s = &m.symbols;
    let el = euler_lagrange_system(m).unwrap();
    let path = gauge_family(m, f64::sin, |t| t * t, |t| 2.0 * t, 1.0, 1000).map_err(|e| e.to_string())?;
    let stencil = stencil_el_residual(m, &el, &path).map_err(|e| e.to_string())?;
    ensure(stencil < GAUGE_EL_TOL, || format!("stencil EL residual {stencil:.3e}"))?;
    let exact = |t: f64| {
        let (st, ct) = (t.sin(), t.cos());
        let q = [st, t * t, 2.0 * (st - t * ct), 4.0 * (3.0 * st - 3.0 * t * ct - t * t * st)];
        let v = [ct, 2.0 * t, 2.0 * t * st, 4.0 * (t * st - t * t * ct)];
        let a = [-st, 2.0, 2.0 * st + 2.0 * t * ct, 4.0 * (st - t * ct + t * t * st)];
        (q, v, a)
    };
    let mut worst: f64 = 0.0;
    for k in 0..=100 {
        let t = k as f64 / 100.0;
        let (q, v, a) = exact(t);
        let mut point = Vec::new();
        for (i, name) in ["w", "x", "y", "z"].iter().enumerate() {
            point.push((name.to_string(), q[i]));
            point.push((velocity_name(name), v[i]));
            point.push((acceleration_name(name), a[i]));
        }
        let named: Vec<(&str, f64)> = point.iter().map(|(n, x)| (n.as_str(), *x)).collect();
        for r in &el.residuals {
            worst = worst.max(s.eval_named(r, &named).unwrap().abs());
        }
    }
    ensure(worst < GAUGE_EL_TOL, || format!("closed-form EL residual {worst:.3e}"))?;
    let (y1, z1) = (path.positions[2][1000], path.positions[3][1000]);
    let (q, _, _) = exact(1.0);
    let gap = (y1 - q[2]).abs().max((z1 - q[3]).abs());
    ensure(gap < 1e-10, || format!("family differs from closed form by {gap:.3e}"))?;
    Ok(format!("closed-form residual {worst:.1e}, stencil residual {stencil:.1e}"))
}

fn bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dirac-mech")).args(args).env("DIRAC_MECH_SEED", "0").output().expect("binary runs")
}

fn c14_cli() -> Verdict {
    for name in ["nonintegrable_a.json", "nonconstant_rank_b.json"] {
        let path = example(name);
        let o = bin(&["verify", path.to_str().unwrap()]);
        ensure(o.status.code() == Some(0), || format!("verify {name} exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)))?;
        let r1 = bin(&["--format", "json", "analyze", path.to_str().unwrap()]);
        let r2 = bin(&["--format", "json", "analyze", path.to_str().unwrap()]);
        ensure(r1.status.success() && r1.stdout == r2.stdout, || format!("analyze {name} not deterministic"))?;
        let parsed: AnalysisReport = serde_json::from_slice(&r1.stdout).map_err(|e| e.to_string())?;
        let model = load(name);
        let direct = build_report(&model, &Analysis::run(&model).unwrap(), 0).unwrap();
        ensure(parsed == direct, || format!("{name}: JSON report does not round-trip"))?;
    }
    let a = example("nonintegrable_a.json");
    let (o1, o2) = (tmp("det1.csv"), tmp("det2.csv"));
    for o in [&o1, &o2] {
        let r = bin(&["integrate", a.to_str().unwrap(), "--hamiltonian", "--init", "x=1,y=2,z=3,p_z=0.5", "--t", "2", "--dt", "0.001", "--out", o.to_str().unwrap()]);
        ensure(r.status.success(), || String::from_utf8_lossy(&r.stderr).into_owned())?;
    }
    let same = std::fs::read(&o1).unwrap() == std::fs::read(&o2).unwrap();
    let _ = (std::fs::remove_file(o1), std::fs::remove_file(o2));
    ensure(same, || "integrate CSV not deterministic".into())?;
    Ok("verify exits 0 on both models; reports and CSVs byte-identical".into())
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 14] = [
        ("bracket anchor", c1_bracket_anchor),
        ("constraint extraction", c2_constraints),
        ("hamiltonian pushforward", c3_pushforward),
        ("dirac machinery", c4_dirac),
        ("explicit first class extension", c5_extension_template),
        ("first class classification", c6_first_class),
        ("orbits and reduction", c7_orbits),
        ("dynamics (a)", c8_flow_a),
        ("dynamics (b)", c9_flow_b),
        ("noether", c10_noether),
        ("killing", c11_killing),
        ("reachability", c12_reach),
        ("gauge model", c13_gauge),
        ("cli", c14_cli),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut out = std::io::stdout().lock();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let line = match verdict {
            Ok(d) => format!("criterion {:>2} PASS {name}: {d}", k + 1),
            Err(d) => {
                failed += 1;
                format!("criterion {:>2} FAIL {name}: {d}", k + 1)
            }
        };
        writeln!(out, "{line}").unwrap();
    }
    writeln!(out, "{} of {} criteria pass", criteria.len() - failed, criteria.len()).unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
