use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{require_dnnf, QueryError, WeightMap};
use crate::circuit::{Circuit, Node, NodeId, Valuation, Var};

/// A satisfying valuation of maximal weight, and that weight.
///
/// Ties between ∨-children go to the lowest index; variables outside the
/// circuit take the heavier literal, 0 on ties.
pub fn best_valuation(c: &Circuit, w: &WeightMap<BigRational>) -> Result<(Valuation, BigRational), QueryError> {
    require_dnnf(c)?;
    if !c.properties().is_smooth {
        return Err(QueryError::NotSmoothDeterministicDnnf);
    }
    w.check_covers(c.universe())?;
    for v in c.universe().iter() {
        let (p, n) = w.pair(v).expect("covered");
        if p <= &BigRational::zero() || n <= &BigRational::zero() {
            return Err(QueryError::NonPositiveWeight(v));
        }
    }
    // None stands for an unsatisfiable gate.
    let mut best: Vec<Option<BigRational>> = Vec::with_capacity(c.num_nodes());
    let mut choice: Vec<usize> = Vec::with_capacity(c.num_nodes());
    for n in c.nodes() {
        let (v, k) = match n {
            Node::True => (Some(BigRational::one()), 0),
            Node::False => (None, 0),
            Node::Lit(l) => (Some(w.get(*l).expect("covered").clone()), 0),
            Node::And(cs) => {
                let mut acc = Some(BigRational::one());
                for ch in cs.iter() {
                    acc = match (acc, &best[ch.index()]) {
                        (Some(a), Some(b)) => Some(a * b),
                        _ => None,
                    };
                }
                (acc, 0)
            }
            Node::Or(cs) => {
                let mut top: Option<(usize, &BigRational)> = None;
                for (i, ch) in cs.iter().enumerate() {
                    if let Some(b) = &best[ch.index()] {
                        if top.is_none_or(|(_, t)| b > t) {
                            top = Some((i, b));
                        }
                    }
                }
                match top {
                    Some((i, b)) => (Some(b.clone()), i),
                    None => (None, 0),
                }
            }
            Node::Not(_) => unreachable!("NNF checked"),
        };
        best.push(v);
        choice.push(k);
    }
    let Some(mut weight) = best[c.output().index()].clone() else {
        return Err(QueryError::Unsatisfiable);
    };
    let mut assign: Vec<(Var, bool)> = Vec::new();
    let mut stack: Vec<NodeId> = vec![c.output()];
    while let Some(g) = stack.pop() {
        match c.node(g) {
            Node::Lit(l) => assign.push((l.var(), l.is_positive())),
            Node::And(cs) => stack.extend(cs.iter().copied()),
            Node::Or(cs) => stack.push(cs[choice[g.index()]]),
            _ => {}
        }
    }
    for v in c.universe().difference(c.varset(c.output()).expect("valid")).iter() {
        let (p, n) = w.pair(v).expect("covered");
        let take = p > n;
        weight *= if take { p } else { n };
        assign.push((v, take));
    }
    Ok((Valuation::from_pairs(assign), weight))
}
