use std::collections::HashMap;

use super::{Circuit, Leaf, Node, NodeId, Valuation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeterminismVerdict {
    Deterministic,
    /// A valuation satisfying two children of one ∨-gate.
    NotDeterministic(Valuation),
    Unknown,
}

/// Brute-force determinism check over all valuations of the universe.
///
/// Valuations are visited in increasing mask order, bit `i` standing for
/// the `i`-th smallest variable, so the witness is the first one found.
pub fn check_determinism_semantic(c: &Circuit, max_vars: usize) -> DeterminismVerdict {
    let vars = c.universe().to_vec();
    if vars.len() > max_vars || vars.len() > 30 {
        return DeterminismVerdict::Unknown;
    }
    let ors: Vec<&[NodeId]> = c
        .nodes()
        .iter()
        .filter_map(|n| match n {
            Node::Or(cs) if cs.len() > 1 => Some(&cs[..]),
            _ => None,
        })
        .collect();
    if ors.is_empty() {
        return DeterminismVerdict::Deterministic;
    }
    let mut dense = vec![false; c.universe().bound()];
    for mask in 0u64..1 << vars.len() {
        for (i, v) in vars.iter().enumerate() {
            dense[v.index()] = mask >> i & 1 == 1;
        }
        let vals = c.eval_all(|v| dense[v.index()]);
        if ors.iter().any(|cs| cs.iter().filter(|ch| vals[ch.index()]).count() > 1) {
            return DeterminismVerdict::NotDeterministic(Valuation::from_mask(&vars, mask));
        }
    }
    DeterminismVerdict::Deterministic
}

/// Sound but incomplete syntactic prover for `f_a ∧ f_b ≡ 0`.
///
/// Rules: a false constant is disjoint from anything; opposite literals are
/// disjoint; an ∨-gate is disjoint from `h` if all its children are; an
/// ∧-gate is disjoint from `h` if one of its children is. Proofs deeper
/// than `MAX_DEPTH` are given up rather than risking the stack.
pub(crate) struct DisjointnessProver<'a> {
    c: &'a Circuit,
    memo: HashMap<(NodeId, NodeId), bool>,
    budget: usize,
    depth: usize,
}

const MAX_DEPTH: usize = 2048;

impl<'a> DisjointnessProver<'a> {
    pub(crate) fn new(c: &'a Circuit, budget: usize) -> Self {
        DisjointnessProver { c, memo: HashMap::new(), budget, depth: 0 }
    }

    pub(crate) fn disjoint(&mut self, a: NodeId, b: NodeId) -> bool {
        let key = if a <= b { (a, b) } else { (b, a) };
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        if self.budget == 0 || self.depth == MAX_DEPTH {
            return false;
        }
        self.budget -= 1;
        self.depth += 1;
        let r = self.prove(a, b);
        self.depth -= 1;
        self.memo.insert(key, r);
        r
    }

    fn prove(&mut self, a: NodeId, b: NodeId) -> bool {
        let (la, lb) = (self.c.leaf(a), self.c.leaf(b));
        if matches!(la, Some(Leaf::Const(false))) || matches!(lb, Some(Leaf::Const(false))) {
            return true;
        }
        if let (Some(Leaf::Lit(x)), Some(Leaf::Lit(y))) = (la, lb) {
            return x == y.negate();
        }
        if (la.is_some() && lb.is_some()) || a == b {
            return false;
        }
        let c = self.c;
        // Expand ∨-gates first: they must be fully covered.
        for (g, h) in [(a, b), (b, a)] {
            if let Node::Or(cs) = c.node(g) {
                return cs.iter().all(|&ch| self.disjoint(ch, h));
            }
        }
        // Two ∧-gates splitting the same variables alike: compare aligned
        // children before the general rule.
        if let (Node::And(xs), Node::And(ys)) = (c.node(a), c.node(b)) {
            let sets = c.varsets();
            for &x in xs.iter() {
                for &y in ys.iter() {
                    if sets[x.index()] == sets[y.index()] && self.disjoint(x, y) {
                        return true;
                    }
                }
            }
        }
        for (g, h) in [(a, b), (b, a)] {
            if let Node::And(cs) = c.node(g) {
                if cs.iter().any(|&ch| self.disjoint(ch, h)) {
                    return true;
                }
            }
        }
        false
    }
}
