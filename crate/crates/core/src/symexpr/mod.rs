//! Exact multivariate rational expressions over the rationals.

mod display;
mod parse;
pub mod poly;
pub mod rational;
pub mod symbols;

use alloc::string::String;

pub use poly::{Monomial, Poly, Rational, Var};
pub use rational::RationalExpr;
pub use symbols::{acceleration_name, momentum_name, velocity_name, ArithOp, SymbolInfo, SymbolKind, Symbols};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("substitution makes a denominator vanish")]
    SubstitutionSingular,
    #[error("substitution makes the denominator {0} vanish")]
    SingularDenominator(String),
    #[error("denominator vanishes at the evaluation point")]
    Singular,
    #[error("symbol #{index} is unbound")]
    UnboundSymbol { index: usize },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("invalid symbol name `{0}`")]
    InvalidName(String),
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("relation for `{0}` must be a univariate polynomial of positive degree")]
    BadRelation(String),
    #[error("cannot differentiate with respect to algebraic parameter `{0}`")]
    DifferentiateAlgebraic(String),
    #[error("value bound to `{0}` is not a root of its relation")]
    InconsistentRoot(String),
    #[error("substitution graph is cyclic at `{0}`")]
    CyclicBindings(String),
}
