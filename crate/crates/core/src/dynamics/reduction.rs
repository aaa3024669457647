use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::DynamicsError;
use crate::legendre::ModelSpec;
use crate::phase::{weak_reduce, SubstitutionGraph};
use crate::symexpr::{RationalExpr, Var};

/// Candidate canonical pair `(qbar, pbar)` with a conserved momentum `j`.
///
/// `template` is the expected reduced Hamiltonian written in the parameter
/// symbols `qbar_sym`, `pbar_sym`, `mu_sym`.
#[derive(Clone, Debug)]
pub struct ChartSpec {
    pub qbar: RationalExpr,
    pub pbar: RationalExpr,
    pub j: RationalExpr,
    pub template: Option<RationalExpr>,
    pub qbar_sym: Var,
    pub pbar_sym: Var,
    pub mu_sym: Var,
}

#[derive(Clone, Debug)]
pub struct VerifiedChart {
    /// `{qbar, pbar}`, `{qbar, j}`, `{pbar, j}`.
    pub brackets: [RationalExpr; 3],
    /// Reduced Hamiltonian in `(qbar_sym, pbar_sym, mu_sym)`.
    pub h_mu: RationalExpr,
}

/// Verifies the chart brackets exactly and rewrites `h` in chart variables,
/// with `j` replaced by `mu`. `graph` fixes the stratum for the comparison.
pub fn reduction_chart_verify(
    m: &ModelSpec,
    h: &RationalExpr,
    graph: &SubstitutionGraph,
    chart: &ChartSpec,
) -> Result<VerifiedChart, DynamicsError> {
    let s = &m.symbols;
    let ps = m.phase_space();
    let b_qp = ps.bracket(&chart.qbar, &chart.pbar, s)?;
    let b_qj = ps.bracket(&chart.qbar, &chart.j, s)?;
    let b_pj = ps.bracket(&chart.pbar, &chart.j, s)?;
    if !s.equal(&b_qp, &RationalExpr::one()) {
        return Err(DynamicsError::ChartBracket { pair: "{qbar,pbar}".to_string(), witness: b_qp });
    }
    for (pair, b) in [("{qbar,j}", &b_qj), ("{pbar,j}", &b_pj)] {
        if !s.is_zero(b) {
            return Err(DynamicsError::ChartBracket { pair: pair.to_string(), witness: b.clone() });
        }
    }
    let h_mu = match &chart.template {
        Some(t) => {
            let mut back = BTreeMap::new();
            back.insert(chart.qbar_sym, chart.qbar.clone());
            back.insert(chart.pbar_sym, chart.pbar.clone());
            back.insert(chart.mu_sym, chart.j.clone());
            let pulled = s.substitute(t, &back)?;
            let diff = weak_reduce(&(&pulled - h), graph, s)?;
            if !s.is_zero(&diff) {
                return Err(DynamicsError::ChartTemplate { witness: diff });
            }
            t.clone()
        }
        None => {
            let (q, p) = match (single_var(&chart.qbar), single_var(&chart.pbar)) {
                (Some(q), Some(p)) => (q, p),
                _ => return Err(DynamicsError::ChartTemplate { witness: chart.qbar.clone() }),
            };
            let mut fwd = BTreeMap::new();
            fwd.insert(q, RationalExpr::var(chart.qbar_sym));
            fwd.insert(p, RationalExpr::var(chart.pbar_sym));
            let out = s.substitute(&weak_reduce(h, graph, s)?, &fwd)?;
            if out.vars().iter().any(|v| m.coords.contains(v) || m.momenta.contains(v)) {
                return Err(DynamicsError::ChartTemplate { witness: out });
            }
            out
        }
    };
    Ok(VerifiedChart { brackets: [b_qp, b_qj, b_pj], h_mu })
}

fn single_var(e: &RationalExpr) -> Option<Var> {
    let (c, n, d) = e.as_monomial_ratio()?;
    (c == crate::symexpr::Rational::from_integer(1.into()) && d.is_one() && n.factors().len() == 1 && n.factors()[0].1 == 1)
        .then(|| n.factors()[0].0)
}

/// `qbar(t) = sqrt(2 h (t + t0)^2 + mu^2 / (8 h))`.
pub fn radial_closed_form(h: f64, mu: f64, t0: f64, ts: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    if !(h > 0.0) {
        return Err(DynamicsError::NonPositiveEnergy);
    }
    Ok(ts.iter().map(|&t| libm::sqrt(2.0 * h * (t + t0) * (t + t0) + mu * mu / (8.0 * h))).collect())
}

/// Zero-momentum branch along the line `y = k x`: `x(t) = (4h/k^2)^(1/4) sqrt(t)`.
pub fn power_law_x(h: f64, k: f64, ts: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    if !(h > 0.0) {
        return Err(DynamicsError::NonPositiveEnergy);
    }
    if k == 0.0 || ts.iter().any(|&t| t < 0.0) {
        return Err(DynamicsError::BadInput("need k != 0 and t >= 0".to_string()));
    }
    let c = libm::pow(4.0 * h / (k * k), 0.25);
    Ok(ts.iter().map(|&t| c * libm::sqrt(t)).collect())
}

/// Time shift matching `radial_closed_form` to `(qbar0, pbar0)`; the sign
/// follows `pbar0`.
pub fn fit_t0(qbar0: f64, pbar0: f64, h: f64, mu: f64) -> f64 {
    let s2 = ((qbar0 * qbar0 - mu * mu / (8.0 * h)) / (2.0 * h)).max(0.0);
    libm::copysign(libm::sqrt(s2), pbar0)
}
