use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{integrate, DynamicsError, OdeSystem};
use crate::dirac::{phase_preference, pieces_of};
use crate::legendre::Stratum;
use crate::phase::{PhaseSpace, SubstitutionGraph};
use crate::sample::{rng, sample_point};
use crate::symexpr::{RationalExpr, SymbolKind, Symbols, Var};

/// Numeric tangency verdict on one piece.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowVerdict {
    pub piece: String,
    pub points: usize,
    /// Largest `|equality|` met along the sampled flows.
    pub max_residual: f64,
    pub tangent: bool,
}

/// Flows `X_f` for time `t` from `points` random points of each piece and
/// records how far the piece equalities drift; tangent below `tol`.
#[allow(clippy::too_many_arguments)]
pub fn flow_tangency_oracle(
    f: &RationalExpr,
    strata: &[Stratum],
    ps: &PhaseSpace,
    symbols: &Symbols,
    seed: u64,
    points: usize,
    t: f64,
    dt: f64,
    tol: f64,
) -> Result<Vec<FlowVerdict>, DynamicsError> {
    let field = ps.hamiltonian_vector_field(f, symbols)?;
    let pref = phase_preference(ps);
    let mut free: Vec<Var> = ps.vars();
    free.extend(symbols.of_kind(SymbolKind::Parameter));
    let mut r = rng(seed);
    let mut out = Vec::new();
    for piece in pieces_of(strata, symbols) {
        let graph = SubstitutionGraph::build(&piece, symbols, &pref)?;
        let mut worst: f64 = 0.0;
        let mut used = 0;
        for _ in 0..points {
            let Some(point) = sample_point(&piece, &graph, symbols, &free, &BTreeMap::new(), &mut r) else {
                continue;
            };
            let constants: BTreeMap<Var, f64> = point.iter().filter(|(v, _)| !ps.vars().contains(v)).map(|(&v, &x)| (v, x)).collect();
            let mut sys = OdeSystem::new(symbols, ps.vars(), field.components(), &constants)?;
            let guards_only = Stratum { equalities: Vec::new(), ..piece.clone() };
            sys.guard_stratum(symbols, &guards_only, &constants)?;
            for (k, e) in piece.equalities.iter().enumerate() {
                sys.monitor(symbols, &alloc::format!("eq{k}"), e, &constants)?;
            }
            let init: Vec<f64> = ps.vars().iter().map(|v| point[v]).collect();
            let traj = integrate(&sys, &init, t, dt)?;
            for row in &traj.monitors {
                for v in row {
                    worst = worst.max(if v.is_finite() { v.abs() } else { f64::INFINITY });
                }
            }
            used += 1;
        }
        out.push(FlowVerdict { piece: piece.name.clone(), points: used, max_residual: worst, tangent: used > 0 && worst < tol });
    }
    Ok(out)
}
