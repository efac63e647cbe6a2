//! Probabilistic labeled trees and bottom-up tree automata, with provenance
//! circuits whose v-tree follows the tree.

mod automaton;
mod json;
mod provenance;
mod sigma;

use thiserror::Error;

use crate::queries::QueryError;

pub use automaton::{annotate, TreeAutomaton};
pub use json::{read_automaton, read_tree, write_automaton, write_tree};
pub use provenance::{answer_circuit, pqe_tree, provenance_tree};
pub use sigma::{ProbTree, SigmaTree};

/// Default cap on the number of states subset construction may create.
pub const DETERMINIZE_CAP: usize = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("node {0} has {1} children; internal nodes need exactly two")]
    NotFull(String, usize),
    #[error("no transition for {0}")]
    IncompleteTransition(String),
    #[error("automaton is not deterministic")]
    NondeterministicAutomaton,
    #[error("determinization exceeds {0} states")]
    TooManyStates(usize),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("node {0} has no probability")]
    MissingProbability(usize),
    #[error("invalid probability `{0}`")]
    InvalidProbability(String),
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Query(#[from] QueryError),
}
