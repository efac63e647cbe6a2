//! Conjunctive queries over databases: parsing, acyclicity, and compilation
//! of query answers into ordered decision circuits.

mod answers;
mod compile;
mod database;
mod hypergraph;
mod query;

use thiserror::Error;

use crate::relational::RelError;

pub use answers::{answer_access, answer_count, answer_enum, naive_answers, Accessor, Answers};
pub(crate) use compile::check_against;
pub use compile::{compile_cq, compile_cq_with, CompiledCq, CqOptions, CqStats};
pub(crate) use database::data_lines;
pub use database::{Database, Fact, FactId};
pub use hypergraph::{
    default_order, elimination_order, has_disruptive_trio, is_acyclic, is_free_connex, join_tree, JoinTree,
};
pub use query::{parse_cq, parse_ucq, Atom, ConjunctiveQuery, Term, Ucq};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CqError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("arity mismatch for relation `{0}`")]
    ArityMismatch(String),
    #[error("head variable `{0}` does not occur in the body")]
    UnboundHeadVariable(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("order misses variables: {}", .0.join(", "))]
    OrderMissingVariables(Vec<String>),
    #[error("order lists `{0}`, which is not a query variable or is repeated")]
    OrderUnknownVariable(String),
    #[error("query is not free-connex acyclic")]
    NotFreeConnex,
    #[error("line {line}: {msg}")]
    Tsv { line: usize, msg: String },
    #[error(transparent)]
    Rel(#[from] RelError),
}
