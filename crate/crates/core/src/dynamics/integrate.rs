use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::legendre::{Sign, Stratum, TAU_EQ};
use crate::symexpr::{rational::RationalExpr, ExprError, Poly, Symbols, Var};

/// Guard threshold: a guarded expression this close to zero ends the run.
pub const TAU_GUARD: f64 = 1e-8;

/// Rational expression lowered to `f64` arithmetic over state slots.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    num: Vec<(f64, Vec<(usize, u32)>)>,
    den: Option<Vec<(f64, Vec<(usize, u32)>)>>,
}

fn compile_poly(p: &Poly, slots: &BTreeMap<Var, usize>, constants: &BTreeMap<Var, f64>) -> Result<Vec<(f64, Vec<(usize, u32)>)>, ExprError> {
    let mut out = Vec::with_capacity(p.len());
    for (m, c) in p.terms() {
        let mut coef = crate::symexpr::poly::rational_to_f64(c);
        let mut factors = Vec::new();
        for &(v, e) in m.factors() {
            if let Some(&slot) = slots.get(&v) {
                factors.push((slot, e));
            } else if let Some(&value) = constants.get(&v) {
                coef *= libm::pow(value, e as f64);
            } else {
                return Err(ExprError::UnboundSymbol { index: v.index() });
            }
        }
        out.push((coef, factors));
    }
    Ok(out)
}

fn eval_poly(terms: &[(f64, Vec<(usize, u32)>)], x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (c, factors) in terms {
        let mut t = *c;
        for &(slot, e) in factors {
            let v = x[slot];
            t *= match e {
                1 => v,
                2 => v * v,
                3 => v * v * v,
                _ => libm::pow(v, e as f64),
            };
        }
        acc += t;
    }
    acc
}

impl CompiledExpr {
    /// Lowers `e`; symbols in `slots` read the state vector, symbols in
    /// `constants` are folded in.
    pub fn new(e: &RationalExpr, slots: &BTreeMap<Var, usize>, constants: &BTreeMap<Var, f64>) -> Result<Self, ExprError> {
        let num = compile_poly(e.numer(), slots, constants)?;
        let den = if e.is_polynomial() { None } else { Some(compile_poly(e.denom(), slots, constants)?) };
        Ok(CompiledExpr { num, den })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = eval_poly(&self.num, x);
        match &self.den {
            None => n,
            Some(d) => n / eval_poly(d, x),
        }
    }
}

#[derive(Clone, Debug)]
pub enum GuardKind {
    NonZero,
    Sign(Sign),
}

#[derive(Clone, Debug)]
pub struct Guard {
    pub label: String,
    pub expr: CompiledExpr,
    pub kind: GuardKind,
}

impl Guard {
    fn violated(&self, x: &[f64]) -> bool {
        let v = self.expr.eval(x);
        match self.kind {
            GuardKind::NonZero => !(v.abs() >= TAU_GUARD),
            GuardKind::Sign(s) => !(v.abs() >= TAU_GUARD && s.holds(v)),
        }
    }
}

/// First-order system `x' = F(x)` with guards, equality constraints and monitors.
#[derive(Clone, Debug)]
pub struct OdeSystem {
    pub vars: Vec<Var>,
    pub names: Vec<String>,
    pub rhs: Vec<CompiledExpr>,
    pub guards: Vec<Guard>,
    pub equalities: Vec<(String, CompiledExpr)>,
    pub monitors: Vec<(String, CompiledExpr)>,
}

impl OdeSystem {
    /// Slots for `vars` in order.
    pub fn slots(vars: &[Var]) -> BTreeMap<Var, usize> {
        vars.iter().enumerate().map(|(i, &v)| (v, i)).collect()
    }

    /// System from symbolic right-hand sides; missing components are zero.
    pub fn new(
        symbols: &Symbols,
        vars: Vec<Var>,
        rhs: &BTreeMap<Var, RationalExpr>,
        constants: &BTreeMap<Var, f64>,
    ) -> Result<Self, ExprError> {
        let slots = Self::slots(&vars);
        let mut consts = constants.clone();
        symbols.bind_algebraic(&mut consts);
        let compiled = vars
            .iter()
            .map(|v| CompiledExpr::new(&rhs.get(v).cloned().unwrap_or_default(), &slots, &consts))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(OdeSystem {
            names: vars.iter().map(|&v| symbols.name(v).to_string()).collect(),
            vars,
            rhs: compiled,
            guards: Vec::new(),
            equalities: Vec::new(),
            monitors: Vec::new(),
        })
    }

    fn compile(&self, symbols: &Symbols, e: &RationalExpr, constants: &BTreeMap<Var, f64>) -> Result<CompiledExpr, ExprError> {
        let mut consts = constants.clone();
        symbols.bind_algebraic(&mut consts);
        CompiledExpr::new(e, &Self::slots(&self.vars), &consts)
    }

    /// Guards from the stratum's nonvanishing and sign conditions; its
    /// equalities are checked at the start and monitored.
    pub fn guard_stratum(&mut self, symbols: &Symbols, st: &Stratum, constants: &BTreeMap<Var, f64>) -> Result<(), ExprError> {
        for e in &st.nonvanishing {
            let expr = self.compile(symbols, e, constants)?;
            self.guards.push(Guard { label: alloc::format!("{} != 0", symbols.display(e)), expr, kind: GuardKind::NonZero });
        }
        for (e, s) in &st.signs {
            let expr = self.compile(symbols, e, constants)?;
            self.guards.push(Guard { label: alloc::format!("{} {} 0", symbols.display(e), &s.symbol()[..1]), expr, kind: GuardKind::Sign(*s) });
        }
        for e in &st.equalities {
            let expr = self.compile(symbols, e, constants)?;
            self.equalities.push((symbols.display(e), expr));
        }
        Ok(())
    }

    pub fn monitor(&mut self, symbols: &Symbols, name: &str, e: &RationalExpr, constants: &BTreeMap<Var, f64>) -> Result<(), ExprError> {
        let expr = self.compile(symbols, e, constants)?;
        self.monitors.push((name.to_string(), expr));
        Ok(())
    }

    fn field(&self, x: &[f64], out: &mut [f64]) {
        for (o, f) in out.iter_mut().zip(&self.rhs) {
            *o = f.eval(x);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StratumExit {
    pub time: f64,
    pub guard: String,
}

/// Uniformly sampled path with monitor values.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub vars: Vec<Var>,
    pub names: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub monitor_names: Vec<String>,
    pub monitors: Vec<Vec<f64>>,
    /// Set when a guard stopped the run early.
    pub exit: Option<StratumExit>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return Some(self.states.iter().map(|s| s[i]).collect());
        }
        let i = self.monitor_names.iter().position(|n| n == name)?;
        Some(self.monitors.iter().map(|m| m[i]).collect())
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// State at sample `k` as a symbol map.
    pub fn point(&self, k: usize) -> BTreeMap<Var, f64> {
        self.vars.iter().copied().zip(self.states[k].iter().copied()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error("step must be positive and finite")]
    BadStep,
    #[error("initial state has {expected} components, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("initial state is off the stratum: {condition}")]
    OffStratum { condition: String },
    #[error("state became non-finite after t = {last_good_time}")]
    NonFinite { last_good_time: f64, last_good_state: Vec<f64> },
}

/// Classical fixed-step RK4 over `round(duration / dt)` steps. A guard
/// falling below [`TAU_GUARD`] (or changing sign) stops the run and is
/// reported in [`Trajectory::exit`].
pub fn integrate(sys: &OdeSystem, init: &[f64], duration: f64, dt: f64) -> Result<Trajectory, IntegrateError> {
    if !(dt > 0.0 && dt.is_finite() && duration >= 0.0 && duration.is_finite()) {
        return Err(IntegrateError::BadStep);
    }
    let n = sys.vars.len();
    if init.len() != n {
        return Err(IntegrateError::Shape { expected: n, got: init.len() });
    }
    if let Some(g) = sys.guards.iter().find(|g| g.violated(init)) {
        return Err(IntegrateError::OffStratum { condition: g.label.clone() });
    }
    if let Some((label, _)) = sys.equalities.iter().find(|(_, e)| !(e.eval(init).abs() <= TAU_EQ)) {
        return Err(IntegrateError::OffStratum { condition: alloc::format!("{label} = 0") });
    }
    let steps = libm::round(duration / dt) as usize;
    let mut traj = Trajectory {
        vars: sys.vars.clone(),
        names: sys.names.clone(),
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        monitor_names: sys.monitors.iter().map(|(m, _)| m.clone()).collect(),
        monitors: Vec::with_capacity(steps + 1),
        exit: None,
    };
    let record = |traj: &mut Trajectory, t: f64, x: &[f64]| {
        traj.times.push(t);
        traj.states.push(x.to_vec());
        traj.monitors.push(sys.monitors.iter().map(|(_, m)| m.eval(x)).collect());
    };
    let mut x = init.to_vec();
    record(&mut traj, 0.0, &x);
    let (mut k1, mut k2, mut k3, mut k4) = (alloc::vec![0.0; n], alloc::vec![0.0; n], alloc::vec![0.0; n], alloc::vec![0.0; n]);
    let mut tmp = alloc::vec![0.0; n];
    for step in 1..=steps {
        sys.field(&x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        sys.field(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        sys.field(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        sys.field(&tmp, &mut k4);
        for i in 0..n {
            tmp[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = step as f64 * dt;
        if tmp.iter().any(|v| !v.is_finite()) {
            return Err(IntegrateError::NonFinite { last_good_time: (step - 1) as f64 * dt, last_good_state: x });
        }
        if let Some(g) = sys.guards.iter().find(|g| g.violated(&tmp)) {
            traj.exit = Some(StratumExit { time: t, guard: g.label.clone() });
            break;
        }
        core::mem::swap(&mut x, &mut tmp);
        record(&mut traj, t, &x);
    }
    Ok(traj)
}

/// `max_t |f(state(t)) - f(state(0))|`.
pub fn conserved_drift(traj: &Trajectory, f: &RationalExpr, symbols: &Symbols, constants: &BTreeMap<Var, f64>) -> Result<f64, ExprError> {
    let mut consts = constants.clone();
    symbols.bind_algebraic(&mut consts);
    let c = CompiledExpr::new(f, &OdeSystem::slots(&traj.vars), &consts)?;
    let mut f0 = None;
    let mut worst: f64 = 0.0;
    for s in &traj.states {
        let v = c.eval(s);
        if !v.is_finite() {
            return Err(ExprError::Singular);
        }
        let base = *f0.get_or_insert(v);
        worst = worst.max((v - base).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::SymbolKind;

    #[test]
    fn harmonic_oscillator_energy() {
        let mut s = Symbols::new();
        let q = s.add("q", SymbolKind::Coordinate).unwrap();
        let p = s.add("p_q", SymbolKind::Momentum).unwrap();
        let mut rhs = BTreeMap::new();
        rhs.insert(q, s.parse("p_q").unwrap());
        rhs.insert(p, s.parse("-q").unwrap());
        let mut sys = OdeSystem::new(&s, alloc::vec![q, p], &rhs, &BTreeMap::new()).unwrap();
        let h = s.parse("(q^2 + p_q^2)/2").unwrap();
        sys.monitor(&s, "h", &h, &BTreeMap::new()).unwrap();
        let traj = integrate(&sys, &[1.0, 0.0], 1.0, 1e-3).unwrap();
        assert_eq!(traj.len(), 1001);
        assert!((traj.last_state()[0] - libm::cos(1.0)).abs() < 1e-12);
        assert!(conserved_drift(&traj, &h, &s, &BTreeMap::new()).unwrap() < 1e-12);
    }

    #[test]
    fn guard_stops_run() {
        let mut s = Symbols::new();
        let q = s.add("q", SymbolKind::Coordinate).unwrap();
        let mut rhs = BTreeMap::new();
        rhs.insert(q, s.parse("-1").unwrap());
        let mut sys = OdeSystem::new(&s, alloc::vec![q], &rhs, &BTreeMap::new()).unwrap();
        let st = Stratum::new("pos").signed(s.parse("q").unwrap(), Sign::Positive);
        sys.guard_stratum(&s, &st, &BTreeMap::new()).unwrap();
        let traj = integrate(&sys, &[0.5], 2.0, 0.1).unwrap();
        let exit = traj.exit.unwrap();
        assert!((exit.time - 0.5).abs() < 1e-9);
        assert!(matches!(integrate(&sys, &[-1.0], 1.0, 0.1), Err(IntegrateError::OffStratum { .. })));
    }

    #[test]
    fn blow_up_is_reported() {
        let mut s = Symbols::new();
        let q = s.add("q", SymbolKind::Coordinate).unwrap();
        let mut rhs = BTreeMap::new();
        rhs.insert(q, s.parse("q^2").unwrap());
        let sys = OdeSystem::new(&s, alloc::vec![q], &rhs, &BTreeMap::new()).unwrap();
        assert!(matches!(integrate(&sys, &[1.0], 10.0, 0.1), Err(IntegrateError::NonFinite { .. })));
    }
}
