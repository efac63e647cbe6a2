//! CNF input and a top-down exhaustive-DPLL compiler to decision-DNNF.

mod compile;
mod dimacs;

use thiserror::Error;

use crate::circuit::{Circuit, Lit, Valuation, Var, VarSet};

pub use compile::{compile_dpll, compile_dpll_with, CompileOptions, CompileStats, Heuristic};
pub use dimacs::{parse_dimacs, parse_dimacs_dnf, write_dimacs, write_dimacs_dnf};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("line {line}: malformed header: {msg}")]
    MalformedHeader { line: usize, msg: String },
    #[error("line {line}: literal {lit} outside 1..={num_vars}")]
    LiteralOutOfRange { line: usize, lit: i64, num_vars: usize },
    #[error("line {line}: invalid token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("header declares {declared} clauses but {found} were given")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("term contains both polarities of {0}")]
    ContradictoryTerm(String),
}

/// A formula in conjunctive normal form over variables `0..num_vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Lit>>) -> Self {
        debug_assert!(clauses.iter().flatten().all(|l| l.var().index() < num_vars));
        CnfFormula { num_vars, clauses }
    }

    pub fn universe(&self) -> VarSet {
        VarSet::range(self.num_vars)
    }

    pub fn eval_with(&self, value: impl Fn(Var) -> bool) -> bool {
        self.clauses.iter().all(|cl| cl.iter().any(|l| l.eval(value(l.var()))))
    }

    pub fn eval(&self, nu: &Valuation) -> bool {
        self.eval_with(|v| nu.get(v).unwrap_or(false))
    }

    /// Brute-force model count, for oracles.
    pub fn count_brute_force(&self) -> u64 {
        assert!(self.num_vars <= 30, "brute force limited to 30 variables");
        (0u64..1 << self.num_vars).filter(|m| self.eval_with(|v| m >> v.0 & 1 == 1)).count() as u64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivalenceVerdict {
    Equivalent,
    /// First valuation (in mask order) where formula and circuit disagree.
    Differs(Valuation),
    Unknown,
}

/// Exhaustive comparison of a formula and a circuit over the formula's variables.
pub fn verify_equivalence(f: &CnfFormula, c: &Circuit, max_vars: usize) -> EquivalenceVerdict {
    if f.num_vars > max_vars || f.num_vars > 30 || c.universe().bound() > f.num_vars {
        return EquivalenceVerdict::Unknown;
    }
    let vars: Vec<Var> = (0..f.num_vars as u32).map(Var).collect();
    for m in 0u64..1 << f.num_vars {
        let val = |v: Var| m >> v.0 & 1 == 1;
        if f.eval_with(val) != c.eval_with(val) {
            return EquivalenceVerdict::Differs(Valuation::from_mask(&vars, m));
        }
    }
    EquivalenceVerdict::Equivalent
}
