use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;

use super::{require_smooth_d_dnnf, QueryError};
use crate::circuit::{Circuit, Node, NodeId, Valuation, Var};

/// Uniform sampler over the satisfying valuations of a smooth d-DNNF.
///
/// Construction counts models per gate once; each draw descends from the
/// output, picking ∨-children with probability proportional to their counts.
pub struct Sampler<'a> {
    c: &'a Circuit,
    counts: Vec<BigUint>,
    free: Vec<Var>,
}

impl<'a> Sampler<'a> {
    pub fn new(c: &'a Circuit) -> Result<Self, QueryError> {
        require_smooth_d_dnnf(c)?;
        let mut counts: Vec<BigUint> = Vec::with_capacity(c.num_nodes());
        for n in c.nodes() {
            let v = match n {
                Node::True | Node::Lit(_) => BigUint::one(),
                Node::False => BigUint::zero(),
                Node::And(cs) => cs.iter().fold(BigUint::one(), |acc, ch| acc * &counts[ch.index()]),
                Node::Or(cs) => cs.iter().map(|ch| &counts[ch.index()]).sum(),
                Node::Not(_) => unreachable!("NNF checked"),
            };
            counts.push(v);
        }
        let free = c.universe().difference(c.varset(c.output()).expect("valid")).to_vec();
        Ok(Sampler { c, counts, free })
    }

    /// Number of satisfying valuations.
    pub fn total(&self) -> BigUint {
        self.counts.last().expect("non-empty").clone() << self.free.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Valuation, QueryError> {
        let out = self.c.output();
        if self.counts[out.index()].is_zero() {
            return Err(QueryError::Unsatisfiable);
        }
        let mut assign: Vec<(Var, bool)> = Vec::with_capacity(self.c.num_vars());
        let mut stack: Vec<NodeId> = vec![out];
        while let Some(g) = stack.pop() {
            match self.c.node(g) {
                Node::Lit(l) => assign.push((l.var(), l.is_positive())),
                Node::And(cs) => stack.extend(cs.iter().copied()),
                Node::Or(cs) => {
                    let mut r = rng.gen_biguint_below(&self.counts[g.index()]);
                    for &ch in cs.iter() {
                        let k = &self.counts[ch.index()];
                        if r < *k {
                            stack.push(ch);
                            break;
                        }
                        r -= k;
                    }
                }
                _ => {}
            }
        }
        for &v in &self.free {
            assign.push((v, rng.gen::<bool>()));
        }
        Ok(Valuation::from_pairs(assign))
    }
}
