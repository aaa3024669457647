use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{DynamicsError, OdeSystem};
use crate::legendre::{energy, ModelSpec, RankStratum, StratifiedSet, Stratum};
use crate::linalg::{ExprMatrix, MatrixError};
use crate::phase::OnStratum;
use crate::symexpr::{RationalExpr, Var};

/// Euler-Lagrange equations `M(q, v) a = F(q, v)`.
#[derive(Clone, Debug)]
pub struct ElSystem {
    /// `d/dt dl/dv^i - dl/dq^i` over `(q, v, a)`.
    pub residuals: Vec<RationalExpr>,
    pub mass: ExprMatrix,
    /// `dl/dq^i - sum_j d^2 l/(dv^i dq^j) v^j`.
    pub forcing: Vec<RationalExpr>,
}

pub fn euler_lagrange_system(m: &ModelSpec) -> Result<ElSystem, DynamicsError> {
    let s = &m.symbols;
    let l = &m.lagrangian;
    let n = m.dof();
    let dv: Vec<RationalExpr> = m.velocities.iter().map(|&v| s.differentiate(l, v)).collect::<Result<_, _>>()?;
    let mass = ExprMatrix::from_fn(n, n, |i, j| s.canonical(&dv[i].derivative(m.velocities[j])));
    let mut forcing = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for i in 0..n {
        let mut f = s.differentiate(l, m.coords[i])?;
        for j in 0..n {
            let mixed = dv[i].derivative(m.coords[j]);
            f = &f - &(&mixed * &RationalExpr::var(m.velocities[j]));
        }
        let f = s.canonical(&f);
        let mut r = -f.clone();
        for j in 0..n {
            r = &r + &(mass.get(i, j) * &RationalExpr::var(m.accelerations[j]));
        }
        residuals.push(s.canonical(&r));
        forcing.push(f);
    }
    Ok(ElSystem { residuals, mass, forcing })
}

/// `a = M^{-1} F` with the inverse certified on `stratum`.
pub fn explicit_accelerations(m: &ModelSpec, el: &ElSystem, stratum: &Stratum) -> Result<Vec<RationalExpr>, DynamicsError> {
    let s = &m.symbols;
    let graph = m.graph(stratum)?;
    let domain = OnStratum { graph: &graph, symbols: s };
    let inv = match el.mass.inverse_on(&domain) {
        Ok(inv) => inv,
        Err(MatrixError::PivotFailure { .. }) | Err(MatrixError::Singular) => {
            return Err(DynamicsError::Degenerate { stratum: stratum.name.clone() })
        }
        Err(e) => return Err(e.into()),
    };
    let n = m.dof();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut a = RationalExpr::zero();
        for j in 0..n {
            a = &a + &(inv.get(i, j) * &el.forcing[j]);
        }
        out.push(graph.reduce(&a, s)?);
    }
    Ok(out)
}

/// First-order Lagrangian flow on `(q, v)`, guarded by `stratum`, with the
/// energy monitored as `e`.
pub fn lagrangian_system(
    m: &ModelSpec,
    el: &ElSystem,
    stratum: &Stratum,
    constants: &BTreeMap<Var, f64>,
) -> Result<OdeSystem, DynamicsError> {
    let acc = explicit_accelerations(m, el, stratum)?;
    let mut rhs = BTreeMap::new();
    for (i, &q) in m.coords.iter().enumerate() {
        rhs.insert(q, RationalExpr::var(m.velocities[i]));
        rhs.insert(m.velocities[i], acc[i].clone());
    }
    let vars: Vec<Var> = m.coords.iter().chain(&m.velocities).copied().collect();
    let mut sys = OdeSystem::new(&m.symbols, vars, &rhs, constants)?;
    sys.guard_stratum(&m.symbols, stratum, constants)?;
    sys.monitor(&m.symbols, "e", &energy(m)?, constants)?;
    Ok(sys)
}

/// Hamiltonian flow `X_h` on `(q, p)`, guarded by `stratum`, with `h` monitored.
pub fn hamiltonian_system(
    m: &ModelSpec,
    h: &RationalExpr,
    stratum: &Stratum,
    constants: &BTreeMap<Var, f64>,
) -> Result<OdeSystem, DynamicsError> {
    let ps = m.phase_space();
    let field = ps.hamiltonian_vector_field(h, &m.symbols)?;
    let vars = ps.vars();
    let mut sys = OdeSystem::new(&m.symbols, vars, field.components(), constants)?;
    sys.guard_stratum(&m.symbols, stratum, constants)?;
    sys.monitor(&m.symbols, "h", h, constants)?;
    Ok(sys)
}

/// Acceleration-free combinations `u . residual` for `u` in the kernel of
/// the velocity Hessian, per configuration stratum.
#[derive(Clone, Debug)]
pub struct Consequences {
    pub stratum: String,
    pub expressions: Vec<RationalExpr>,
}

pub fn constraint_consequences(
    m: &ModelSpec,
    el: &ElSystem,
    strata: &StratifiedSet<RankStratum>,
) -> Result<Vec<Consequences>, DynamicsError> {
    let s = &m.symbols;
    let mut out = Vec::new();
    for (st, data) in strata.iter() {
        let mut expressions = Vec::new();
        for u in &data.kernel {
            let mut c = RationalExpr::zero();
            for (ui, r) in u.iter().zip(&el.residuals) {
                c = &c + &(ui * r);
            }
            let c = data.graph.reduce(&c, s)?;
            if c.vars().iter().any(|v| m.accelerations.contains(v)) {
                return Err(DynamicsError::BadInput(alloc::format!("kernel combination keeps accelerations on {}", st.name)));
            }
            if !s.is_zero(&c) {
                expressions.push(c);
            }
        }
        out.push(Consequences { stratum: st.name.clone(), expressions });
    }
    Ok(out)
}

/// Pairing of declared initial-data conditions with derived consequences.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialDataMatch {
    /// For each declared condition, the index of a derived consequence it is
    /// a constant multiple of.
    pub declared: Vec<Option<usize>>,
    /// Derived consequences matched by no declared condition.
    pub unmatched: Vec<RationalExpr>,
}

/// Compares declared conditions with the consequences on the stratum named
/// `stratum` (the first stratum when `None`).
pub fn initial_data_report(m: &ModelSpec, consequences: &[Consequences], stratum: Option<&str>) -> InitialDataMatch {
    let s = &m.symbols;
    let cons = match stratum {
        Some(name) => consequences.iter().find(|c| c.stratum == name),
        None => consequences.first(),
    };
    let derived: &[RationalExpr] = cons.map(|c| c.expressions.as_slice()).unwrap_or(&[]);
    let proportional = |a: &RationalExpr, b: &RationalExpr| {
        a.try_div(b).ok().map(|q| s.canonical(&q)).is_some_and(|q| q.is_constant() && !q.is_zero())
    };
    let declared: Vec<Option<usize>> =
        m.initial_data.iter().map(|d| derived.iter().position(|c| proportional(d, c))).collect();
    let unmatched = derived
        .iter()
        .enumerate()
        .filter(|(i, _)| !declared.contains(&Some(*i)))
        .map(|(_, c)| c.clone())
        .collect();
    InitialDataMatch { declared, unmatched }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::{rank_strata, velocity_hessian};

    fn example_a() -> ModelSpec {
        let mut m = ModelSpec::new(&["x", "y", "z"]).unwrap();
        m.set_lagrangian("(z_dot - y*x_dot)^2/2").unwrap();
        m
    }

    #[test]
    fn residuals_of_example_a() {
        let m = example_a();
        let el = euler_lagrange_system(&m).unwrap();
        let s = &m.symbols;
        assert_eq!(el.residuals[1], s.parse("-x_dot*(y*x_dot - z_dot)").unwrap());
        assert!(matches!(
            explicit_accelerations(&m, &el, &Stratum::new("all")),
            Err(DynamicsError::Degenerate { .. })
        ));
        let hess = velocity_hessian(&m).unwrap();
        let strata = rank_strata(&hess, &m).unwrap();
        let cons = constraint_consequences(&m, &el, &strata).unwrap();
        assert_eq!(cons[0].expressions.len(), 2);
        let w = s.parse("z_dot - y*x_dot").unwrap();
        for c in &cons[0].expressions {
            let q = s.canonical(&c.try_div(&w).unwrap());
            assert!(q.is_polynomial() && q.numer().total_degree() == 1);
        }
    }

    #[test]
    fn residuals_of_example_b() {
        let mut m = ModelSpec::new(&["x", "y"]).unwrap();
        m.set_lagrangian("(y^2*x_dot^2 + x^2*y_dot^2)/2").unwrap();
        let el = euler_lagrange_system(&m).unwrap();
        let s = &m.symbols;
        // d/dt(y^2 x_dot) - x y_dot^2
        assert_eq!(el.residuals[0], s.parse("y^2*x_ddot + 2*y*y_dot*x_dot - x*y_dot^2").unwrap());
        let open = Stratum::new("open").nonzero(s.parse("x*y").unwrap());
        let a = explicit_accelerations(&m, &el, &open).unwrap();
        assert_eq!(a[0], s.parse("(x*y_dot^2 - 2*y*y_dot*x_dot)/y^2").unwrap());
    }

    #[test]
    fn free_particle_has_zero_acceleration() {
        let mut m = ModelSpec::new(&["x"]).unwrap();
        m.set_lagrangian("x_dot^2/2").unwrap();
        let el = euler_lagrange_system(&m).unwrap();
        let a = explicit_accelerations(&m, &el, &Stratum::new("all")).unwrap();
        assert!(a[0].is_zero());
    }
}
