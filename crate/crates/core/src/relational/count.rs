use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::classify::{classify_rel, respects_order};
use super::{AttrId, RelCircuit, RelError, RelId, RelNode, Tuple, UnionSemantics};

/// Per-gate counts `|rel(g)|` over `attr(g)`, padding factors included.
pub(crate) fn gate_counts(c: &RelCircuit) -> Result<Vec<BigUint>, RelError> {
    let r = classify_rel(c);
    if !r.decomposable {
        return Err(RelError::NotCountable("a join is not Cartesian".into()));
    }
    if !r.decision_only {
        return Err(RelError::NotCountable("a union is not a decision gate".into()));
    }
    let sets = c.attrsets();
    let mut counts: Vec<BigUint> = Vec::with_capacity(c.num_nodes());
    for (i, n) in c.nodes().iter().enumerate() {
        let v = match n {
            RelNode::Atom { .. } | RelNode::Unit => BigUint::one(),
            RelNode::Empty => BigUint::zero(),
            RelNode::Join(cs) => cs.iter().map(|k| &counts[k.index()]).product(),
            RelNode::Union(cs) => {
                cs.iter().map(|k| &counts[k.index()] * padding_factor(c, &c.padding(&sets[i], &sets[k.index()]))).sum()
            }
        };
        counts.push(v);
    }
    Ok(counts)
}

fn padding_factor(c: &RelCircuit, attrs: &[AttrId]) -> BigUint {
    if matches!(c.semantics(), UnionSemantics::ZeroSuppressed(_)) {
        return BigUint::one();
    }
    attrs.iter().map(|&a| BigUint::from(c.schema().domain_size(a))).product()
}

/// `|rel(C)|` over the circuit's attributes.
pub fn count_rel(c: &RelCircuit) -> Result<BigUint, RelError> {
    let counts = gate_counts(c)?;
    let out = c.output();
    let pad = c.padding(c.universe(), c.attrset(out));
    Ok(&counts[out.index()] * padding_factor(c, &pad))
}

/// The `i`-th tuple (1-based) in lexicographic order.
pub fn direct_access(c: &RelCircuit, i: &BigUint) -> Result<Tuple, RelError> {
    RelIndex::new(c)?.access(i)
}

struct Branch {
    value: u32,
    child: RelId,
    /// Running total of padded branch counts up to and including this one.
    cumulative: BigUint,
}

/// Preprocessed counts for repeated lexicographic direct access.
pub struct RelIndex<'a> {
    c: &'a RelCircuit,
    order: Vec<AttrId>,
    counts: Vec<BigUint>,
    /// Sorted by value for each decision gate; empty for other nodes.
    branches: Vec<Vec<Branch>>,
    total: BigUint,
}

enum Item {
    Gate(RelId),
    Free(AttrId),
}

impl<'a> RelIndex<'a> {
    /// Uses the circuit's attached order, or the derived ordered witness.
    pub fn new(c: &'a RelCircuit) -> Result<Self, RelError> {
        let order = match c.order() {
            Some(o) => o.to_vec(),
            None => classify_rel(c)
                .ordered_witness
                .ok_or_else(|| RelError::NotOrdered("no attribute order is respected".into()))?,
        };
        Self::with_order(c, order)
    }

    pub fn with_order(c: &'a RelCircuit, order: Vec<AttrId>) -> Result<Self, RelError> {
        let counts = gate_counts(c)?;
        let set: crate::circuit::VarSet = order.iter().map(|a| a.var()).collect();
        if set.len() != order.len() || &set != c.universe() {
            return Err(RelError::NotOrdered("order must list every attribute once".into()));
        }
        if !respects_order(c, &order) {
            return Err(RelError::NotOrdered("a decision continues with an earlier attribute".into()));
        }
        let sets = c.attrsets();
        let mut branches: Vec<Vec<Branch>> = Vec::with_capacity(c.num_nodes());
        for i in 0..c.num_nodes() {
            let id = RelId(i as u32);
            let Some(x) = c.decision_attr(id) else {
                branches.push(Vec::new());
                continue;
            };
            let mut bs: Vec<(u32, RelId, BigUint)> = c
                .node(id)
                .children()
                .iter()
                .map(|&k| {
                    let (d, _) = c.branch_on(k, x).expect("decision shape");
                    let pad = padding_factor(c, &c.padding(&sets[i], &sets[k.index()]));
                    (d, k, &counts[k.index()] * pad)
                })
                .collect();
            bs.sort_by_key(|b| b.0);
            let mut acc = BigUint::zero();
            branches.push(
                bs.into_iter()
                    .map(|(value, child, n)| {
                        acc += n;
                        Branch { value, child, cumulative: acc.clone() }
                    })
                    .collect(),
            );
        }
        let out = c.output();
        let total = &counts[out.index()] * padding_factor(c, &c.padding(c.universe(), c.attrset(out)));
        Ok(RelIndex { c, order, counts, branches, total })
    }

    pub fn count(&self) -> &BigUint {
        &self.total
    }

    pub fn order(&self) -> &[AttrId] {
        &self.order
    }

    fn item_count(&self, it: &Item) -> BigUint {
        match it {
            Item::Gate(g) => self.counts[g.index()].clone(),
            Item::Free(a) => BigUint::from(self.c.schema().domain_size(*a)),
        }
    }

    /// Adds `g` to the frontier, expanding joins and fixing atoms.
    fn push_gate(&self, g: RelId, frontier: &mut Vec<Item>, vals: &mut [Option<u32>]) {
        match self.c.node(g) {
            RelNode::Atom { attr, value } => vals[attr.index()] = Some(*value),
            RelNode::Unit | RelNode::Empty => {}
            RelNode::Join(cs) => {
                for &k in cs.iter() {
                    self.push_gate(k, frontier, vals);
                }
            }
            RelNode::Union(_) => frontier.push(Item::Gate(g)),
        }
    }

    fn push_padding(&self, attrs: Vec<AttrId>, frontier: &mut Vec<Item>, vals: &mut [Option<u32>]) {
        for a in attrs {
            match self.c.default_of(a) {
                Some(d) => vals[a.index()] = Some(d),
                None => frontier.push(Item::Free(a)),
            }
        }
    }

    /// The `i`-th tuple, 1-based, in lexicographic order of the attribute
    /// order and the domain orders.
    pub fn access(&self, i: &BigUint) -> Result<Tuple, RelError> {
        if i.is_zero() || *i > self.total {
            return Err(RelError::OutOfRange { index: i.to_string(), count: self.total.to_string() });
        }
        let c = self.c;
        let sets = c.attrsets();
        let mut vals: Vec<Option<u32>> = vec![None; c.schema().len()];
        let mut frontier: Vec<Item> = Vec::new();
        let out = c.output();
        self.push_gate(out, &mut frontier, &mut vals);
        self.push_padding(c.padding(c.universe(), &sets[out.index()]), &mut frontier, &mut vals);
        // 0-based rank within the product of the frontier's relations.
        let mut rank = i - 1u32;
        let mut product = self.total.clone();
        for &x in &self.order {
            while vals[x.index()].is_none() {
                let pos = frontier
                    .iter()
                    .position(|it| match it {
                        Item::Free(a) => *a == x,
                        Item::Gate(g) => sets[g.index()].contains(x.var()),
                    })
                    .ok_or_else(|| RelError::NotOrdered(format!("attribute {} not reachable", x.0)))?;
                let item = frontier.swap_remove(pos);
                if let Item::Gate(g) = item {
                    if self.branches[g.index()].is_empty() {
                        // Single-child union: replace by its padded child.
                        let k = c.node(g).children()[0];
                        self.push_gate(k, &mut frontier, &mut vals);
                        self.push_padding(c.padding(&sets[g.index()], &sets[k.index()]), &mut frontier, &mut vals);
                        continue;
                    }
                }
                let block = &product / self.item_count(&item);
                let (q, r) = rank.div_rem(&block);
                match item {
                    Item::Free(a) => {
                        vals[a.index()] = Some(u32::try_from(&q).expect("within domain"));
                        rank = r;
                        product = block;
                    }
                    Item::Gate(g) => {
                        let bs = &self.branches[g.index()];
                        if c.decision_attr(g) != Some(x) {
                            return Err(RelError::NotOrdered(format!("gate {} is reached before its attribute", g.0)));
                        }
                        let j = bs.partition_point(|b| b.cumulative <= q);
                        let before = if j == 0 { BigUint::zero() } else { bs[j - 1].cumulative.clone() };
                        let chosen = &bs[j];
                        vals[x.index()] = Some(chosen.value);
                        rank = (q - &before) * &block + r;
                        product = (&chosen.cumulative - &before) * &block;
                        let (_, rest) = c.branch_on(chosen.child, x).expect("decision shape");
                        for k in rest {
                            self.push_gate(k, &mut frontier, &mut vals);
                        }
                        self.push_padding(
                            c.padding(&sets[g.index()], &sets[chosen.child.index()]),
                            &mut frontier,
                            &mut vals,
                        );
                    }
                }
            }
        }
        Ok(Tuple::from_pairs(self.order.iter().map(|&a| (a, vals[a.index()].expect("assigned")))))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::circuit::VarSet;
    use crate::relational::tests::{bits, guarded_rel};
    use crate::relational::{RelBuilder, Schema, UnionSemantics};

    #[test]
    fn guarded_count() {
        assert_eq!(count_rel(&guarded_rel()).unwrap(), BigUint::from(6u8));
    }

    #[test]
    fn unit_over_two_attrs() {
        let schema = Arc::new(
            Schema::new(vec![
                super::super::Attribute { name: "x".into(), domain: vec![0.into(), 1.into()] },
                super::super::Attribute { name: "y".into(), domain: vec![0.into(), 1.into(), 2.into()] },
            ])
            .unwrap(),
        );
        let mut b = RelBuilder::new();
        let u = b.unit();
        let c = b.finish(u, schema, VarSet::range(2), UnionSemantics::FullDomain).unwrap();
        assert_eq!(count_rel(&c).unwrap(), BigUint::from(6u8));
        let all: Vec<String> = (1..=6u32).map(|i| bits(&direct_access(&c, &BigUint::from(i)).unwrap())).collect();
        assert_eq!(all, ["00", "01", "02", "10", "11", "12"]);
    }

    #[test]
    fn access_small_relation() {
        // {00, 01, 10} over x < y.
        let schema = Arc::new(Schema::boolean(["x", "y"]));
        let mut b = RelBuilder::new();
        let x0 = b.atom(AttrId(0), 0);
        let x1 = b.atom(AttrId(0), 1);
        let y0 = b.atom(AttrId(1), 0);
        let br1 = b.join(vec![x1, y0]);
        let root = b.union(vec![x0, br1]);
        let c = b.finish(root, schema, VarSet::range(2), UnionSemantics::FullDomain).unwrap();
        let at = |i: u32| direct_access(&c, &BigUint::from(i)).map(|t| bits(&t));
        assert_eq!(at(1).unwrap(), "00");
        assert_eq!(at(2).unwrap(), "01");
        assert_eq!(at(3).unwrap(), "10");
        assert!(matches!(at(4), Err(RelError::OutOfRange { .. })));
        assert!(matches!(at(0), Err(RelError::OutOfRange { .. })));
    }

    #[test]
    fn guarded_access_matches_sorted_brute_force() {
        let c = guarded_rel();
        let idx = RelIndex::new(&c).unwrap();
        let expect: Vec<String> = c.tuples_brute_force().iter().map(bits).collect();
        let got: Vec<String> = (1..=6u32).map(|i| bits(&idx.access(&BigUint::from(i)).unwrap())).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn unordered_access_is_rejected() {
        let c = guarded_rel().with_order(vec![AttrId(1), AttrId(0), AttrId(2), AttrId(3)]).unwrap();
        assert!(matches!(direct_access(&c, &BigUint::one()), Err(RelError::NotOrdered(_))));
    }
}
