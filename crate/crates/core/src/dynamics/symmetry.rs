use alloc::vec::Vec;

use super::DynamicsError;
use crate::dirac::{first_class_tangency, TangencyReport};
use crate::legendre::ModelSpec;
use crate::linalg::ExprMatrix;
use crate::phase::VectorField;
use crate::symexpr::{RationalExpr, Symbols, Var};

#[derive(Clone, Debug)]
pub struct NoetherResult {
    /// Lifted derivative of the Lagrangian along the field; zero.
    pub certificate: RationalExpr,
    /// `j_X = sum_i p_i X^i(q)`.
    pub momentum: RationalExpr,
    /// `j_X` pulled back by the Legendre map.
    pub lagrangian_momentum: RationalExpr,
    /// Tangency of `j_X` on the declared constraint strata, when any.
    pub tangency: Option<TangencyReport>,
}

/// Checks `X^i dl/dq^i + (v . dX/dq)^i dl/dv^i = 0` and builds the momentum.
pub fn noether(m: &ModelSpec, x: &VectorField) -> Result<NoetherResult, DynamicsError> {
    let s = &m.symbols;
    for (v, c) in x.components() {
        if !m.coords.contains(v) || !c.is_polynomial() || c.vars().iter().any(|w| !m.coords.contains(w) && !is_param(s, *w)) {
            return Err(DynamicsError::NotPolynomialField);
        }
    }
    let l = &m.lagrangian;
    let mut cert = RationalExpr::zero();
    for (i, &q) in m.coords.iter().enumerate() {
        let xi = x.component(q);
        cert = &cert + &(&xi * &s.differentiate(l, q)?);
        let mut lifted = RationalExpr::zero();
        for (j, &qj) in m.coords.iter().enumerate() {
            lifted = &lifted + &(&RationalExpr::var(m.velocities[j]) * &xi.derivative(qj));
        }
        cert = &cert + &(&lifted * &s.differentiate(l, m.velocities[i])?);
    }
    let cert = s.canonical(&cert);
    if !s.is_zero(&cert) {
        return Err(DynamicsError::NotInvariant { witness: cert });
    }
    let mut momentum = RationalExpr::zero();
    for (i, &q) in m.coords.iter().enumerate() {
        momentum = &momentum + &(&RationalExpr::var(m.momenta[i]) * &x.component(q));
    }
    let momentum = s.canonical(&momentum);
    let lagrangian_momentum = s.substitute(&momentum, &m.momentum_bindings()?)?;
    let tangency = if m.constraint_strata.is_empty() {
        None
    } else {
        Some(first_class_tangency(&momentum, &m.constraint_strata, &m.phase_space(), s)?)
    };
    Ok(NoetherResult { certificate: cert, momentum, lagrangian_momentum, tangency })
}

fn is_param(s: &Symbols, v: Var) -> bool {
    matches!(s.kind(v), crate::symexpr::SymbolKind::Parameter | crate::symexpr::SymbolKind::Algebraic)
}

/// All components of the Lie derivative `L_X g` over `coords`.
pub fn killing_check(g: &ExprMatrix, x: &VectorField, coords: &[Var], symbols: &Symbols) -> ExprMatrix {
    let n = coords.len();
    let comps: Vec<RationalExpr> = coords.iter().map(|&q| x.component(q)).collect();
    ExprMatrix::from_fn(n, n, |i, j| {
        let mut acc = RationalExpr::zero();
        for k in 0..n {
            acc = &acc + &(&comps[k] * &g.get(i, j).derivative(coords[k]));
            acc = &acc + &(g.get(k, j) * &comps[k].derivative(coords[i]));
            acc = &acc + &(g.get(i, k) * &comps[k].derivative(coords[j]));
        }
        symbols.canonical(&acc)
    })
}
