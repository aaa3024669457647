//! Equations of motion, flows, symmetries and curve construction.
//!
//! Symbolic side: Euler-Lagrange residuals, Noether momenta, Killing
//! checks and canonical reduction charts. Numeric side: a guarded
//! fixed-step RK4 integrator, closed-form comparators, stencil-based
//! residual certificates and the area-prescribing curve builder.

mod el;
mod integrate;
mod oracle;
mod reach;
mod reduction;
mod symmetry;

pub use el::{
    constraint_consequences, euler_lagrange_system, explicit_accelerations, hamiltonian_system, initial_data_report,
    lagrangian_system, Consequences, ElSystem, InitialDataMatch,
};
pub use integrate::{
    conserved_drift, integrate, CompiledExpr, Guard, GuardKind, IntegrateError, OdeSystem, StratumExit, Trajectory,
    TAU_GUARD,
};
pub use oracle::{flow_tangency_oracle, FlowVerdict};
pub use reach::{
    gauge_family, reach_connect, stencil_el_residual, type_one_solution, ReachCertificate, ReachCurve, SampledPath,
    DEFAULT_SEGMENTS,
};
pub use reduction::{fit_t0, power_law_x, radial_closed_form, reduction_chart_verify, ChartSpec, VerifiedChart};
pub use symmetry::{killing_check, noether, NoetherResult};

use crate::dirac::DiracError;
use crate::legendre::LegendreError;
use crate::linalg::MatrixError;
use crate::phase::PhaseError;
use crate::symexpr::{ExprError, RationalExpr};
use alloc::string::String;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Legendre(#[from] LegendreError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Dirac(#[from] DiracError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("velocity Hessian is not invertible on stratum {stratum}")]
    Degenerate { stratum: String },
    #[error("symmetry is not a Lagrangian symmetry")]
    NotInvariant { witness: RationalExpr },
    #[error("symmetry components must be polynomial in the coordinates")]
    NotPolynomialField,
    #[error("chart bracket {pair} is not canonical")]
    ChartBracket { pair: String, witness: RationalExpr },
    #[error("Hamiltonian does not match the reduced template")]
    ChartTemplate { witness: RationalExpr },
    #[error("energy must be positive")]
    NonPositiveEnergy,
    #[error("{which} endpoint violates z_dot = y*x_dot (residual {residual:e})")]
    OffManifold { which: &'static str, residual: f64 },
    #[error("area equation has no bracketed root; raise n_seg")]
    NoBracket,
    #[error("bad input: {0}")]
    BadInput(String),
}
