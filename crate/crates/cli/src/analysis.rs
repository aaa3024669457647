//! The analysis pipeline shared by every command.

use dirac_core::dirac::{classify, Classification, ConstraintClass, DiracData};
use dirac_core::dynamics::{constraint_consequences, euler_lagrange_system, Consequences, ElSystem};
use dirac_core::legendre::{
    primary_constraints, pushforward_hamiltonian, rank_strata, velocity_hessian, ConstraintSystem, LegendreError,
    RankStratum, StratifiedSet, Stratum, StratumHamiltonian,
};
use dirac_core::linalg::ExprMatrix;
use dirac_core::symexpr::RationalExpr;

use crate::error::CliError;
use crate::model::Model;

pub fn legendre_error(e: LegendreError) -> CliError {
    match e {
        LegendreError::RankMismatch { .. } | LegendreError::FiberViolation { .. } | LegendreError::PushforwardMismatch { .. } => {
            CliError::Verify(e.to_string())
        }
        other => CliError::Input(other.to_string()),
    }
}

pub fn core_error(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Symbolic results of the Legendre and constraint analysis.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub hessian: ExprMatrix,
    pub strata: StratifiedSet<RankStratum>,
    pub systems: Vec<ConstraintSystem>,
    pub hamiltonians: Vec<StratumHamiltonian>,
    pub classifications: Vec<Classification>,
    pub el: ElSystem,
    pub consequences: Vec<Consequences>,
}

impl Analysis {
    pub fn run(model: &Model) -> Result<Analysis, CliError> {
        let m = &model.spec;
        let hessian = velocity_hessian(m).map_err(legendre_error)?;
        let strata = rank_strata(&hessian, m).map_err(legendre_error)?;
        let systems = primary_constraints(m, &strata).map_err(legendre_error)?;
        let hamiltonians = pushforward_hamiltonian(m, &hessian, &strata).map_err(legendre_error)?;
        let ps = m.phase_space();
        let classifications =
            systems.iter().map(|cs| classify(cs, &ps, &m.symbols)).collect::<Result<Vec<_>, _>>().map_err(core_error)?;
        let el = euler_lagrange_system(m).map_err(core_error)?;
        let consequences = constraint_consequences(m, &el, &strata).map_err(core_error)?;
        Ok(Analysis { hessian, strata, systems, hamiltonians, classifications, el, consequences })
    }

    /// Index of the configuration stratum called `name`, or 0.
    pub fn system_index(&self, name: Option<&str>) -> Result<usize, CliError> {
        match name {
            None => Ok(0),
            Some(n) => self
                .systems
                .iter()
                .position(|cs| cs.config.name == n)
                .ok_or_else(|| CliError::Input(format!("no configuration stratum named {n:?}"))),
        }
    }

    /// Dirac data on the first classified piece with second class
    /// generators, within the configuration stratum `name`.
    pub fn dirac(&self, model: &Model, name: Option<&str>) -> Result<DiracData, CliError> {
        let i = self.system_index(name)?;
        let cs = &self.systems[i];
        let piece = self.classifications[i]
            .pieces
            .iter()
            .find(|p| p.classes.contains(&ConstraintClass::Second))
            .ok_or_else(|| CliError::Input(format!("stratum {:?} has no second class constraints", cs.config.name)))?;
        DiracData::from_piece(piece, &cs.generators, &model.spec.phase_space(), &model.spec.symbols).map_err(core_error)
    }

    /// Pieces of the constraint set: declared strata, else the primary
    /// constraint strata.
    pub fn constraint_pieces(&self, model: &Model) -> Vec<Stratum> {
        if !model.spec.constraint_strata.is_empty() {
            return model.spec.constraint_strata.clone();
        }
        self.systems
            .iter()
            .map(|cs| {
                let mut s = cs.stratum.clone();
                s.name = cs.config.name.clone();
                s
            })
            .collect()
    }

    pub fn hamiltonian(&self, name: &str) -> Option<&RationalExpr> {
        self.hamiltonians.iter().find(|h| h.stratum.name == name).map(|h| &h.h)
    }
}
