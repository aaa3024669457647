//! Subcommand implementations. Each returns the text for standard output.

use std::collections::BTreeMap;
use std::path::Path;

use dirac_core::dirac::{dirac_bracket, modify_first_class, phase_preference, pieces_of};
use dirac_core::dynamics::{
    hamiltonian_system, integrate as run_rk4, lagrangian_system, noether, reach_connect, IntegrateError, OdeSystem,
    ReachCertificate, Trajectory, DEFAULT_SEGMENTS,
};
use dirac_core::legendre::{Stratum, TAU_EQ};
use dirac_core::phase::SubstitutionGraph;
use dirac_core::symexpr::{Symbols, Var};
use serde::Serialize;

use crate::analysis::{core_error, Analysis};
use crate::csv::trajectory_csv;
use crate::error::{CliError, LastGood};
use crate::model::Model;
use crate::report::build_report;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serializes") + "\n"
}

pub fn analyze(model: &Model, format: Format, seed: u64) -> Result<String, CliError> {
    let analysis = Analysis::run(model)?;
    let report = build_report(model, &analysis, seed)?;
    Ok(match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    })
}

#[derive(Serialize)]
struct BracketOut {
    f: String,
    g: String,
    dirac: bool,
    value: String,
    /// Value after reduction on the constraint set.
    weak: Option<String>,
}

pub fn bracket(model: &Model, f: &str, g: &str, dirac: bool, stratum: Option<&str>, format: Format) -> Result<String, CliError> {
    let s = &model.spec.symbols;
    let (fe, ge) = (model.parse(f)?, model.parse(g)?);
    let out = if dirac {
        let analysis = Analysis::run(model)?;
        let dd = analysis.dirac(model, stratum)?;
        let v = s.canonical(&dirac_bracket(&fe, &ge, &dd, s).map_err(core_error)?);
        let weak = dd.reduce(&v, s).map_err(core_error)?;
        BracketOut { f: s.display(&fe), g: s.display(&ge), dirac, value: s.display(&v), weak: Some(s.display(&weak)) }
    } else {
        let v = model.spec.phase_space().bracket(&fe, &ge, s).map_err(core_error)?;
        BracketOut { f: s.display(&fe), g: s.display(&ge), dirac, value: s.display(&v), weak: None }
    };
    Ok(match format {
        Format::Json => json(&out),
        Format::Text => match &out.weak {
            Some(w) if *w != out.value => format!("{}\nweakly: {w}\n", out.value),
            _ => format!("{}\n", out.value),
        },
    })
}

#[derive(Serialize)]
struct ClassifyOut {
    stratum: String,
    conditions: String,
    constraints: Vec<String>,
    pieces: Vec<ClassifyPiece>,
}

#[derive(Serialize)]
struct ClassifyPiece {
    label: String,
    conditions: String,
    classes: Vec<(String, String)>,
}

pub fn classify(model: &Model, format: Format) -> Result<String, CliError> {
    let s = &model.spec.symbols;
    let analysis = Analysis::run(model)?;
    let out: Vec<ClassifyOut> = analysis
        .systems
        .iter()
        .zip(&analysis.classifications)
        .map(|(cs, cl)| ClassifyOut {
            stratum: cs.config.name.clone(),
            conditions: cs.config.describe(s),
            constraints: cs.generators.iter().map(|g| s.display(g)).collect(),
            pieces: cl
                .pieces
                .iter()
                .map(|p| ClassifyPiece {
                    label: p.label.clone(),
                    conditions: p.stratum.describe(s),
                    classes: cs.generators.iter().zip(&p.classes).map(|(g, c)| (s.display(g), c.label().to_string())).collect(),
                })
                .collect(),
        })
        .collect();
    Ok(match format {
        Format::Json => json(&out),
        Format::Text => {
            let mut t = String::new();
            for st in &out {
                t.push_str(&format!("stratum {} ({}): {} constraints\n", st.stratum, st.conditions, st.constraints.len()));
                for p in &st.pieces {
                    let cls: Vec<String> = p.classes.iter().map(|(g, c)| format!("{g}: {c}")).collect();
                    t.push_str(&format!("  {} ({}): {}\n", p.label, p.conditions, cls.join(", ")));
                }
            }
            t
        }
    })
}

#[derive(Serialize)]
struct ModifyOut {
    f: String,
    modified: String,
}

pub fn modify(model: &Model, f: &str, stratum: Option<&str>, format: Format) -> Result<String, CliError> {
    let s = &model.spec.symbols;
    let fe = model.parse(f)?;
    let analysis = Analysis::run(model)?;
    let dd = analysis.dirac(model, stratum)?;
    let fs = modify_first_class(&fe, &dd, s).map_err(core_error)?;
    let out = ModifyOut { f: s.display(&fe), modified: s.display(&fs) };
    Ok(match format {
        Format::Json => json(&out),
        Format::Text => format!("{}\n", out.modified),
    })
}

/// Parses `k=v` pairs separated by commas.
pub fn parse_assignments(items: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    let mut out = Vec::new();
    for item in items.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| CliError::Input(format!("expected name=value, got {item:?}")))?;
        let v: f64 = v.trim().parse().map_err(|_| CliError::Input(format!("bad number in {item:?}")))?;
        if !v.is_finite() {
            return Err(CliError::Input(format!("non-finite value in {item:?}")));
        }
        out.push((k.trim().to_string(), v));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Hamiltonian,
    Lagrangian,
}

pub struct IntegrateArgs<'a> {
    pub flow: Flow,
    pub init: &'a [String],
    pub t: f64,
    pub dt: f64,
    pub stratum: Option<&'a str>,
    pub out: Option<&'a Path>,
}

#[derive(Serialize)]
struct IntegrateOut {
    flow: &'static str,
    stratum: String,
    steps: usize,
    final_time: String,
    csv: Option<String>,
}

fn assign_point(s: &Symbols, init: &[(String, f64)], allowed: &[Var]) -> Result<BTreeMap<Var, f64>, CliError> {
    let mut point = BTreeMap::new();
    for (k, v) in init {
        let var = s.lookup(k).map_err(|_| CliError::Input(format!("unknown symbol {k:?} in --init")))?;
        if !allowed.contains(&var) {
            return Err(CliError::Input(format!("{k:?} is not a state variable of this flow")));
        }
        if point.insert(var, *v).is_some() {
            return Err(CliError::Input(format!("{k:?} given twice in --init")));
        }
    }
    Ok(point)
}

/// Completes `given` on `st`; `None` when the point is not on `st`.
fn complete_on(st: &Stratum, s: &Symbols, pref: &[Var], vars: &[Var], given: &BTreeMap<Var, f64>) -> Option<BTreeMap<Var, f64>> {
    let graph = SubstitutionGraph::build(st, s, pref).ok()?;
    let mut point = given.clone();
    s.bind_algebraic(&mut point);
    let mut filled = point.clone();
    graph.complete_point(s, &mut filled).ok()?;
    for (v, x) in filled {
        point.entry(v).or_insert(x);
    }
    if vars.iter().any(|v| !point.contains_key(v)) {
        return None;
    }
    st.contains(s, &point, TAU_EQ).ok()?.then_some(point)
}

/// First candidate containing the completed point; with `name`, only the
/// stratum of that name or its sign pieces are tried.
fn pick_stratum(
    candidates: &[Stratum],
    name: Option<&str>,
    s: &Symbols,
    pref: &[Var],
    vars: &[Var],
    given: &BTreeMap<Var, f64>,
) -> Result<(Stratum, BTreeMap<Var, f64>), CliError> {
    let named = |c: &&Stratum| match name {
        None => true,
        Some(n) => c.name == n || c.name.strip_prefix(n).is_some_and(|rest| rest.starts_with('[')),
    };
    let pool: Vec<&Stratum> = candidates.iter().filter(named).collect();
    if let Some(n) = name {
        if pool.is_empty() {
            return Err(CliError::Input(format!("no stratum named {n:?}")));
        }
    }
    for st in pool {
        if let Some(p) = complete_on(st, s, pref, vars, given) {
            return Ok((st.clone(), p));
        }
    }
    Err(CliError::Input(match name {
        Some(n) => format!("initial point is not on stratum {n:?} or leaves state variables unset"),
        None => "initial point lies on no known stratum or leaves state variables unset".into(),
    }))
}

fn integrate_error(e: IntegrateError, sys: &OdeSystem) -> CliError {
    match e {
        IntegrateError::NonFinite { last_good_time, last_good_state } => CliError::Numeric {
            message: format!("non-finite state after t = {last_good_time:.16e}"),
            last_good: Some(LastGood { time: last_good_time, state: sys.names.iter().cloned().zip(last_good_state).collect() }),
        },
        other => CliError::Input(other.to_string()),
    }
}

fn write_output(path: Option<&Path>, csv: &str) -> Result<Option<String>, CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, csv).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            Ok(Some(p.display().to_string()))
        }
        None => Ok(None),
    }
}

fn trajectory_exit(traj: &Trajectory) -> Option<CliError> {
    let exit = traj.exit.as_ref()?;
    let last = traj.len() - 1;
    Some(CliError::Numeric {
        message: format!("stratum exit at t = {:.16e}: guard `{}` no longer holds", exit.time, exit.guard),
        last_good: Some(LastGood { time: traj.times[last], state: traj.names.iter().cloned().zip(traj.states[last].iter().copied()).collect() }),
    })
}

/// Output produced before a numeric event, and the event itself.
pub struct Outcome {
    pub stdout: String,
    pub error: Option<CliError>,
}

pub fn integrate(model: &Model, args: &IntegrateArgs, format: Format) -> Result<Outcome, CliError> {
    if !(args.t > 0.0 && args.t.is_finite() && args.dt > 0.0 && args.dt.is_finite()) {
        return Err(CliError::Input("--t and --dt must be positive".into()));
    }
    let m = &model.spec;
    let s = &m.symbols;
    let analysis = Analysis::run(model)?;
    let init = parse_assignments(args.init)?;
    let mut constants = BTreeMap::new();
    s.bind_algebraic(&mut constants);

    let (mut sys, stratum, point) = match args.flow {
        Flow::Hamiltonian => {
            let ps = m.phase_space();
            let vars = ps.vars();
            let given = assign_point(s, &init, &vars)?;
            let pieces = pieces_of(&analysis.constraint_pieces(model), s);
            let (st, point) = pick_stratum(&pieces, args.stratum, s, &phase_preference(&ps), &vars, &given)?;
            let (config, _) = analysis
                .strata
                .locate(s, &point, TAU_EQ)
                .ok_or_else(|| CliError::Input("initial configuration lies on no rank stratum".into()))?;
            let h = analysis.hamiltonian(&config.name).expect("every rank stratum has a Hamiltonian").clone();
            let mut sys = hamiltonian_system(m, &h, &st, &constants).map_err(core_error)?;
            for (name, x) in &m.symmetries {
                if let Ok(r) = noether(m, x) {
                    sys.monitor(s, &format!("j_{name}"), &r.momentum, &constants).map_err(core_error)?;
                }
            }
            if let Some(chart) = &model.chart {
                let finite = |e| s.eval(e, &point).is_ok_and(f64::is_finite);
                if st.equalities.is_empty() && finite(&chart.qbar) && finite(&chart.pbar) {
                    sys.monitor(s, "qbar", &chart.qbar, &constants).map_err(core_error)?;
                    sys.monitor(s, "pbar", &chart.pbar, &constants).map_err(core_error)?;
                }
            }
            for (k, e) in st.equalities.iter().enumerate() {
                let name = format!("c_{}", k + 1);
                if s.get(&name).is_none() {
                    sys.monitor(s, &name, e, &constants).map_err(core_error)?;
                }
            }
            (sys, st, point)
        }
        Flow::Lagrangian => {
            let vars: Vec<Var> = m.coords.iter().chain(&m.velocities).copied().collect();
            let given = assign_point(s, &init, &vars)?;
            let config: Vec<Stratum> = analysis.strata.iter().flat_map(|(st, _)| st.sign_pieces(s)).collect();
            let (st, point) = pick_stratum(&config, args.stratum, s, &m.solve_preference(), &vars, &given)?;
            let mut sys = lagrangian_system(m, &analysis.el, &st, &constants).map_err(core_error)?;
            for (name, x) in &m.symmetries {
                if let Ok(r) = noether(m, x) {
                    sys.monitor(s, &format!("j_{name}"), &r.lagrangian_momentum, &constants).map_err(core_error)?;
                }
            }
            (sys, st, point)
        }
    };
    let x0: Vec<f64> = sys.vars.iter().map(|v| point[v]).collect();
    sys.names = sys.vars.iter().map(|&v| s.name(v).to_string()).collect();
    let traj = run_rk4(&sys, &x0, args.t, args.dt).map_err(|e| integrate_error(e, &sys))?;
    let csv = trajectory_csv(&traj);
    let written = write_output(args.out, &csv)?;
    if let Some(err) = trajectory_exit(&traj) {
        return Ok(Outcome { stdout: if written.is_none() { csv } else { String::new() }, error: Some(err) });
    }
    let summary = IntegrateOut {
        flow: match args.flow {
            Flow::Hamiltonian => "hamiltonian",
            Flow::Lagrangian => "lagrangian",
        },
        stratum: stratum.name.clone(),
        steps: traj.len() - 1,
        final_time: format!("{:.16e}", traj.times[traj.len() - 1]),
        csv: written.clone(),
    };
    let stdout = match (written, format) {
        (None, _) => csv,
        (Some(_), Format::Json) => json(&summary),
        (Some(p), Format::Text) => format!("{} flow on {}: {} steps to t = {}, written to {p}\n", summary.flow, summary.stratum, summary.steps, summary.final_time),
    };
    Ok(Outcome { stdout, error: None })
}

const REACH_NAMES: [&str; 6] = ["x", "y", "z", "x_dot", "y_dot", "z_dot"];

/// Six numbers `x,y,z,x_dot,y_dot,z_dot`, or `name=value` pairs for all six.
pub fn parse_reach_point(text: &str) -> Result<[f64; 6], CliError> {
    let mut out = [0.0; 6];
    if text.contains('=') {
        let pairs = parse_assignments(&[text.to_string()])?;
        let mut seen = [false; 6];
        for (k, v) in pairs {
            let i = REACH_NAMES
                .iter()
                .position(|n| *n == k)
                .ok_or_else(|| CliError::Input(format!("unknown component {k:?}; expected one of {}", REACH_NAMES.join(","))))?;
            out[i] = v;
            seen[i] = true;
        }
        if let Some(i) = seen.iter().position(|b| !b) {
            return Err(CliError::Input(format!("missing component {}", REACH_NAMES[i])));
        }
        return Ok(out);
    }
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(CliError::Input(format!("expected six comma separated numbers, got {text:?}")));
    }
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| CliError::Input(format!("bad number {p:?}")))?;
        if !o.is_finite() {
            return Err(CliError::Input(format!("non-finite number {p:?}")));
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct ReachOut {
    n_seg: usize,
    samples: usize,
    endpoint_error: String,
    area: String,
    area_residual: String,
    max_el_residual: String,
    max_membership: String,
    amplitude: String,
    csv: Option<String>,
}

pub struct ReachArgs<'a> {
    pub from: &'a str,
    pub to: &'a str,
    pub n_seg: Option<usize>,
    pub samples: usize,
    pub out: Option<&'a Path>,
}

pub fn reach(model: &Model, args: &ReachArgs, format: Format) -> Result<String, CliError> {
    let (p0, p1) = (parse_reach_point(args.from)?, parse_reach_point(args.to)?);
    let analysis = Analysis::run(model)?;
    let n_seg = args.n_seg.unwrap_or(DEFAULT_SEGMENTS);
    let curve = reach_connect(&model.spec, &analysis.el, p0, p1, n_seg, args.samples).map_err(core_error)?;
    let csv = trajectory_csv(&curve.trajectory);
    let written = write_output(args.out, &csv)?;
    let c: &ReachCertificate = &curve.certificate;
    let e = |x: f64| format!("{x:.6e}");
    let out = ReachOut {
        n_seg,
        samples: args.samples,
        endpoint_error: e(c.endpoint_error),
        area: e(c.area),
        area_residual: e(c.area_residual),
        max_el_residual: e(c.max_el_residual),
        max_membership: e(c.max_membership),
        amplitude: e(c.amplitude),
        csv: written.clone(),
    };
    Ok(match (written, format) {
        (None, _) => csv,
        (Some(_), Format::Json) => json(&out),
        (Some(p), Format::Text) => format!(
            "endpoint error {}\narea {} (residual {})\nmax EL residual {}\nmax membership residual {}\nloop amplitude {}\nwritten to {p}\n",
            out.endpoint_error, out.area, out.area_residual, out.max_el_residual, out.max_membership, out.amplitude
        ),
    })
}
