use std::collections::BTreeSet;

use super::{AttrId, RelCircuit, RelNode};
use crate::circuit::{synthesize_from_splits, VTree, VarSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelReport {
    /// Every join is Cartesian.
    pub decomposable: bool,
    /// Every union's children have equal attribute sets.
    pub smooth_union: bool,
    /// Every union with two or more children is a decision gate.
    pub decision_only: bool,
    /// An order `x1 < … < xn` under which every decision on `x_i` continues
    /// only with later attributes.
    pub ordered_witness: Option<Vec<AttrId>>,
    pub structured_witness: Option<VTree>,
}

impl RelReport {
    /// Counting, enumeration and direct access apply.
    pub fn is_countable(&self) -> bool {
        self.decomposable && self.decision_only
    }
}

pub fn classify_rel(c: &RelCircuit) -> RelReport {
    let sets = c.attrsets();
    let mut decomposable = true;
    let mut smooth_union = true;
    let mut decision_only = true;
    for (i, n) in c.nodes().iter().enumerate() {
        let id = super::RelId(i as u32);
        match n {
            RelNode::Join(_) => decomposable &= c.is_cartesian(id),
            RelNode::Union(cs) => {
                smooth_union &= cs.iter().all(|k| sets[k.index()] == sets[i]);
                decision_only &= cs.len() < 2 || c.decision_attr(id).is_some();
            }
            _ => {}
        }
    }
    let ordered_witness = if decision_only { ordered_witness(c) } else { None };
    let structured_witness = if decomposable { structured_witness(c, ordered_witness.as_deref()) } else { None };
    RelReport { decomposable, smooth_union, decision_only, ordered_witness, structured_witness }
}

/// Whether every decision gate on `x` continues with attributes after `x`.
pub(crate) fn respects_order(c: &RelCircuit, order: &[AttrId]) -> bool {
    let mut rank = vec![usize::MAX; c.schema().len()];
    for (i, a) in order.iter().enumerate() {
        rank[a.index()] = i;
    }
    let sets = c.attrsets();
    (0..c.num_nodes() as u32).map(super::RelId).all(|id| {
        let Some(x) = c.decision_attr(id) else { return true };
        c.node(id).children().iter().all(|&k| {
            let (_, rest) = c.branch_on(k, x).expect("decision shape");
            rest.iter()
                .flat_map(|r| sets[r.index()].iter())
                .all(|v| rank[v.index()] > rank[x.index()] && rank[v.index()] != usize::MAX)
        })
    })
}

/// The attached order if it is respected, else a topological order of the
/// "decided before" relation with ties broken by attribute index.
fn ordered_witness(c: &RelCircuit) -> Option<Vec<AttrId>> {
    if let Some(o) = c.order() {
        return respects_order(c, o).then(|| o.to_vec());
    }
    let n = c.schema().len();
    let sets = c.attrsets();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for i in 0..c.num_nodes() as u32 {
        let id = super::RelId(i);
        let Some(x) = c.decision_attr(id) else { continue };
        for &k in c.node(id).children() {
            let (_, rest) = c.branch_on(k, x).expect("decision shape");
            for r in rest {
                for v in sets[r.index()].iter() {
                    succ[x.index()].insert(v.index());
                }
            }
        }
    }
    let universe: Vec<usize> = c.universe().iter().map(|v| v.index()).collect();
    let mut indeg = vec![0usize; n];
    for &a in &universe {
        for &b in &succ[a] {
            indeg[b] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = universe.iter().copied().filter(|&a| indeg[a] == 0).collect();
    let mut order = Vec::with_capacity(universe.len());
    while let Some(a) = ready.pop_first() {
        order.push(AttrId(a as u32));
        for &b in &succ[a] {
            indeg[b] -= 1;
            if indeg[b] == 0 {
                ready.insert(b);
            }
        }
    }
    (order.len() == universe.len()).then_some(order)
}

fn structured_witness(c: &RelCircuit, order: Option<&[AttrId]>) -> Option<VTree> {
    let sets = c.attrsets();
    let splits: Vec<Vec<VarSet>> = c
        .nodes()
        .iter()
        .filter_map(|n| match n {
            RelNode::Join(cs) => Some(cs.iter().map(|k| sets[k.index()].clone()).collect()),
            _ => None,
        })
        .collect();
    let respected = |t: &VTree| splits.iter().all(|s| t.respects_split(s));
    if let Some(o) = order {
        let vars: Vec<_> = o.iter().map(|a| a.var()).collect();
        if let Some(t) = VTree::right_linear(&vars).filter(|t| respected(t)) {
            return Some(t);
        }
    }
    synthesize_from_splits(c.universe(), splits.clone()).filter(|t| respected(t))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::circuit::VarSet;
    use crate::relational::tests::guarded_rel;
    use crate::relational::{RelBuilder, Schema, UnionSemantics};

    #[test]
    fn guarded_is_ordered_decision() {
        let r = classify_rel(&guarded_rel());
        assert!(r.decomposable && r.decision_only && r.is_countable());
        assert!(!r.smooth_union);
        assert_eq!(r.ordered_witness, Some(vec![AttrId(0), AttrId(1), AttrId(2), AttrId(3)]));
        assert!(r.structured_witness.is_some());
    }

    #[test]
    fn flags() {
        let schema = Arc::new(Schema::boolean(["x", "y"]));
        let mut b = RelBuilder::new();
        let x0 = b.atom(AttrId(0), 0);
        let x1 = b.atom(AttrId(0), 1);
        let y1 = b.atom(AttrId(1), 1);
        let j = b.add(RelNode::Join(vec![x0, x1].into()));
        let j2 = b.join(vec![y1, j]);
        let c = b.finish(j2, schema.clone(), VarSet::range(2), UnionSemantics::FullDomain).unwrap();
        assert!(!classify_rel(&c).decomposable);

        let mut b = RelBuilder::new();
        let x0 = b.atom(AttrId(0), 0);
        let x1 = b.atom(AttrId(0), 1);
        let u = b.union(vec![x0, x1]);
        let c = b.finish(u, schema.clone(), VarSet::range(2), UnionSemantics::FullDomain).unwrap();
        let r = classify_rel(&c);
        assert!(r.smooth_union && r.decision_only);

        // y decided first, then x.
        let mut b = RelBuilder::new();
        let (x0, x1, y0, y1) = (b.atom(AttrId(0), 0), b.atom(AttrId(0), 1), b.atom(AttrId(1), 0), b.atom(AttrId(1), 1));
        let dx = b.union(vec![x0, x1]);
        let l = b.join(vec![y0, dx]);
        let r = b.join(vec![y1, x0]);
        let right = b.union(vec![l, r]);
        let c = b.finish(right, schema, VarSet::range(2), UnionSemantics::FullDomain).unwrap();
        let r = classify_rel(&c);
        assert!(r.decision_only);
        assert_eq!(r.ordered_witness, Some(vec![AttrId(1), AttrId(0)]));
        assert!(c
            .clone()
            .with_order(vec![AttrId(0), AttrId(1)])
            .map(|c| classify_rel(&c).ordered_witness)
            .unwrap()
            .is_none());
    }
}
