//! Tractable queries on certified circuits: satisfiability, counting,
//! weighted counting, enumeration, sampling and approximate DNF counting.

mod best;
mod count;
mod enumerate;
mod karp_luby;
mod sample;
mod sat;
mod semiring;

use std::borrow::Cow;
use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::circuit::{smooth, Circuit, Lit, Var, VarSet};

pub use best::best_valuation;
pub use count::{count_by_cardinality, model_count, wmc};
pub use enumerate::{enumerate, Models};
pub use karp_luby::{approx_count_dnf, karp_luby_samples, ApproxParams};
pub use sample::Sampler;
pub use sat::{satisfiable, witness};
pub use semiring::{Counting, FloatSemiring, MaxTimes, RationalSemiring, Semiring};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("circuit is not a DNNF")]
    NotDnnf,
    #[error("circuit is not a smooth deterministic DNNF")]
    NotSmoothDeterministicDnnf,
    #[error("no weight given for variable {0}")]
    IncompleteWeightMap(Var),
    #[error("circuit is unsatisfiable")]
    Unsatisfiable,
    #[error("weights must be strictly positive (variable {0})")]
    NonPositiveWeight(Var),
    #[error("invalid approximation parameters: {0}")]
    InvalidParams(String),
}

/// Literal weights: a positive and a negative weight per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMap<E> {
    weights: BTreeMap<Var, (E, E)>,
}

impl<E> Default for WeightMap<E> {
    fn default() -> Self {
        WeightMap { weights: BTreeMap::new() }
    }
}

impl<E: Clone> WeightMap<E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, v: Var, pos: E, neg: E) -> &mut Self {
        self.weights.insert(v, (pos, neg));
        self
    }

    pub fn uniform(vars: &VarSet, pos: E, neg: E) -> Self {
        WeightMap { weights: vars.iter().map(|v| (v, (pos.clone(), neg.clone()))).collect() }
    }

    pub fn get(&self, l: Lit) -> Option<&E> {
        self.weights.get(&l.var()).map(|(p, n)| if l.is_positive() { p } else { n })
    }

    pub fn pair(&self, v: Var) -> Option<&(E, E)> {
        self.weights.get(&v)
    }

    pub(crate) fn check_covers(&self, vars: &VarSet) -> Result<(), QueryError> {
        match vars.iter().find(|v| !self.weights.contains_key(v)) {
            Some(v) => Err(QueryError::IncompleteWeightMap(v)),
            None => Ok(()),
        }
    }
}

impl WeightMap<BigRational> {
    /// Weights `(p, 1 − p)` from per-variable probabilities.
    pub fn probabilities(probs: impl IntoIterator<Item = (Var, BigRational)>) -> Self {
        let weights = probs.into_iter().map(|(v, p)| (v, (p.clone(), BigRational::one() - p))).collect();
        WeightMap { weights }
    }

    /// All literal weights 1.
    pub fn ones(vars: &VarSet) -> Self {
        Self::uniform(vars, BigRational::one(), BigRational::one())
    }

    pub(crate) fn is_probability(&self) -> bool {
        self.weights.values().all(|(p, n)| *p >= BigRational::zero() && *n >= BigRational::zero() && (p + n).is_one())
    }
}

pub(crate) fn require_dnnf(c: &Circuit) -> Result<(), QueryError> {
    if c.properties().is_dnnf() {
        Ok(())
    } else {
        Err(QueryError::NotDnnf)
    }
}

/// Preconditions of the counting queries: smooth, decomposable, deterministic.
pub(crate) fn require_smooth_d_dnnf(c: &Circuit) -> Result<(), QueryError> {
    let p = c.properties();
    if p.is_dnnf() && p.is_smooth && c.is_certified_deterministic() {
        Ok(())
    } else {
        Err(QueryError::NotSmoothDeterministicDnnf)
    }
}

/// Smooths a deterministic DNNF when needed, so it meets the counting preconditions.
pub fn prepare_for_counting(c: &Circuit) -> Result<Cow<'_, Circuit>, QueryError> {
    let p = c.properties();
    if !p.is_dnnf() || !c.is_certified_deterministic() {
        return Err(QueryError::NotSmoothDeterministicDnnf);
    }
    if p.is_smooth {
        return Ok(Cow::Borrowed(c));
    }
    let s = smooth(c).map_err(|_| QueryError::NotSmoothDeterministicDnnf)?;
    Ok(Cow::Owned(s))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::circuit::{Circuit, CircuitBuilder, Lit, Var, VarSet};

    /// x2 ∧ (¬x1 ∨ (x1 ∧ ¬x3)) over x1..x4, as a decision circuit.
    pub fn guarded_decision() -> Circuit {
        let mut b = CircuitBuilder::new();
        let x2 = b.lit(Lit::pos(Var(1)));
        let nx3 = b.lit(Lit::neg(Var(2)));
        let t = b.constant(true);
        let d = b.decision(Var(0), t, nx3);
        let root = b.and(vec![x2, d]);
        b.finish(root, VarSet::range(4)).unwrap()
    }

    /// (R(a) ∨ R(a')) ∧ S(b) with variables 0, 1, 2.
    pub fn two_rs_one_s() -> Circuit {
        let mut b = CircuitBuilder::new();
        let t = b.constant(true);
        let ra2 = b.lit(Lit::pos(Var(1)));
        let inner = b.decision(Var(0), ra2, t);
        let sb = b.lit(Lit::pos(Var(2)));
        let root = b.and(vec![inner, sb]);
        b.finish(root, VarSet::range(3)).unwrap()
    }
}
