//! Boolean provenance of queries over databases, and the probabilistic and
//! game-theoretic tasks computed from it.

mod lift;
mod pqe;
mod readonce;
mod tid;

use thiserror::Error;

use crate::circuit::{CircuitError, Var, VarSet};
use crate::cq::{CqError, Database, FactId};
use crate::queries::QueryError;
use crate::relational::RelError;

pub use lift::{lift, provenance_circuit_sjf, provenance_dnf, provenance_dnf_ucq, Lifted};
pub use pqe::{brute_force_probability, pqe, shapley, uniform_reliability, PqeMode};
pub use readonce::{is_hierarchical, provenance_read_once, read_once_to_obdd, read_once_to_obdd_over, ReadOnce};
pub use tid::Tid;

/// Most facts a brute-force evaluation enumerates subsets of.
pub const BRUTE_FORCE_LIMIT: usize = 20;
/// Most endogenous facts for brute-force Shapley values.
pub const SHAPLEY_BRUTE_FORCE_LIMIT: usize = 15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProvError {
    #[error("query has a self-join")]
    SelfJoinPresent,
    #[error("query is not hierarchical")]
    NotHierarchical,
    #[error("{facts} relevant facts exceed the brute-force limit of {limit}")]
    TooLargeForBruteForce { facts: usize, limit: usize },
    #[error("target fact is exogenous")]
    TargetExogenous,
    #[error("no tractable path and {facts} endogenous facts exceed the brute-force limit of {limit}")]
    NoTractablePathAndTooLarge { facts: usize, limit: usize },
    #[error("fact {0} is not in the database")]
    UnknownFact(String),
    #[error("exact evaluation needs a single conjunctive query")]
    NotConjunctive,
    #[error("invalid probability `{0}`")]
    InvalidProbability(String),
    #[error("line {line}: {msg}")]
    Tsv { line: usize, msg: String },
    #[error(transparent)]
    Cq(#[from] CqError),
    #[error(transparent)]
    Rel(#[from] RelError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// The Boolean variable standing for a fact.
pub fn fact_var(f: FactId) -> Var {
    Var(f.0)
}

pub fn var_fact(v: Var) -> FactId {
    FactId(v.0)
}

/// One variable per fact of `db`.
pub fn fact_universe(db: &Database) -> VarSet {
    VarSet::range(db.len())
}

/// Variable names `R(a,b)` for every fact.
pub fn fact_names(db: &Database) -> Vec<(Var, String)> {
    (0..db.len() as u32).map(|i| (Var(i), db.fact(FactId(i)).to_string())).collect()
}
