use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Circuit, Leaf, Lit, Node, NodeId, VTree, Var, VarSet};

/// Syntactic flags of a circuit, computed in one pass and cached on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Properties {
    pub is_nnf: bool,
    pub is_decomposable: bool,
    pub all_or_decision: bool,
    pub is_smooth: bool,
}

impl Properties {
    pub(crate) fn compute(c: &Circuit) -> Properties {
        let sets = c.varsets();
        let mut p = Properties { is_nnf: true, is_decomposable: true, all_or_decision: true, is_smooth: true };
        for (i, n) in c.nodes().iter().enumerate() {
            match n {
                Node::Not(ch) => {
                    if c.leaf(*ch).is_none() {
                        p.is_nnf = false;
                    }
                }
                Node::And(cs) => {
                    if !pairwise_disjoint(cs.iter().map(|ch| &sets[ch.index()])) {
                        p.is_decomposable = false;
                    }
                }
                Node::Or(cs) => {
                    if cs.len() > 1 && c.decision_var(NodeId(i as u32)).is_none() {
                        p.all_or_decision = false;
                    }
                    if cs.iter().any(|ch| sets[ch.index()] != sets[i]) {
                        p.is_smooth = false;
                    }
                }
                _ => {}
            }
        }
        p
    }

    pub fn is_dnnf(&self) -> bool {
        self.is_nnf && self.is_decomposable
    }
}

pub(crate) fn pairwise_disjoint<'a>(sets: impl Iterator<Item = &'a VarSet>) -> bool {
    let mut acc = VarSet::new();
    for s in sets {
        if !acc.is_disjoint(s) {
            return false;
        }
        acc.union_with(s);
    }
    true
}

/// Position of a circuit in the class lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassReport {
    pub is_nnf: bool,
    pub is_decomposable: bool,
    pub all_or_decision: bool,
    pub is_smooth: bool,
    /// A v-tree respected by every ∧-gate, when one was found.
    pub structured_witness: Option<VTree>,
    /// A variable order in which the circuit is an OBDD, when it is one.
    pub obdd_order: Option<Vec<Var>>,
    /// True iff every ∨-gate is a decision gate.
    pub syntactic_deterministic: bool,
    /// Every ∨-gate's children were proven pairwise disjoint by syntactic
    /// reasoning (a superset of the decision-gate guarantee).
    pub proven_deterministic: bool,
}

impl ClassReport {
    pub fn is_dnnf(&self) -> bool {
        self.is_nnf && self.is_decomposable
    }

    pub fn is_d_dnnf(&self) -> bool {
        self.is_dnnf() && self.proven_deterministic
    }

    pub fn class_name(&self) -> &'static str {
        match (self.is_dnnf(), self.obdd_order.is_some(), self.all_or_decision, self.proven_deterministic) {
            (false, ..) if self.is_nnf => "NNF",
            (false, ..) => "circuit",
            (true, true, ..) => "OBDD",
            (true, false, true, _) if self.structured_witness.is_some() => "dec-SDNNF",
            (true, false, true, _) => "dec-DNNF",
            (true, false, false, true) if self.structured_witness.is_some() => "d-SDNNF",
            (true, false, false, true) => "d-DNNF",
            _ if self.structured_witness.is_some() => "SDNNF",
            _ => "DNNF",
        }
    }
}

/// Certifies class membership; `hint` is verified instead of synthesizing a v-tree.
pub fn classify(c: &Circuit, hint: Option<&VTree>) -> ClassReport {
    let p = c.properties().clone();
    let obdd_order = if p.is_nnf && p.all_or_decision { obdd_order(c) } else { None };
    let structured_witness = if !p.is_nnf || !p.is_decomposable {
        None
    } else if let Some(h) = hint {
        h.is_respected_by(c).then(|| h.clone())
    } else {
        obdd_order
            .as_deref()
            .and_then(VTree::right_linear)
            .filter(|t| t.is_respected_by(c))
            .or_else(|| synthesize_vtree(c))
    };
    ClassReport {
        is_nnf: p.is_nnf,
        is_decomposable: p.is_decomposable,
        all_or_decision: p.all_or_decision,
        is_smooth: p.is_smooth,
        structured_witness,
        obdd_order,
        syntactic_deterministic: p.all_or_decision,
        proven_deterministic: p.all_or_decision || c.is_proven_deterministic(),
    }
}

/// A branch of a diagram node: the tested literal and where it leads.
fn branch(c: &Circuit, id: NodeId) -> Option<(Lit, Option<NodeId>)> {
    if let Some(Leaf::Lit(l)) = c.leaf(id) {
        return Some((l, None));
    }
    match c.node(id) {
        Node::And(cs) if cs.len() == 2 => match (c.leaf(cs[0]), c.leaf(cs[1])) {
            (Some(Leaf::Lit(l)), _) => Some((l, Some(cs[1]))),
            (_, Some(Leaf::Lit(l))) => Some((l, Some(cs[0]))),
            _ => None,
        },
        _ => None,
    }
}

/// Tested variable and successor nodes of a diagram-shaped node.
fn diagram_node(c: &Circuit, id: NodeId) -> Option<(Option<Var>, Vec<NodeId>)> {
    match c.leaf(id) {
        Some(Leaf::Const(_)) => return Some((None, vec![])),
        Some(Leaf::Lit(l)) => return Some((Some(l.var()), vec![])),
        None => {}
    }
    match c.node(id) {
        Node::And(_) => {
            let (l, t) = branch(c, id)?;
            Some((Some(l.var()), t.into_iter().collect()))
        }
        Node::Or(cs) if cs.len() == 2 => {
            let (l0, t0) = branch(c, cs[0])?;
            let (l1, t1) = branch(c, cs[1])?;
            (l0 == l1.negate()).then(|| (Some(l0.var()), t0.into_iter().chain(t1).collect()))
        }
        _ => None,
    }
}

/// Detects whether the circuit is an OBDD and returns a compatible order.
fn obdd_order(c: &Circuit) -> Option<Vec<Var>> {
    let out = c.output();
    let mut tested: HashMap<NodeId, (Option<Var>, Vec<NodeId>)> = HashMap::new();
    let mut stack = vec![out];
    while let Some(id) = stack.pop() {
        if tested.contains_key(&id) {
            continue;
        }
        let d = diagram_node(c, id)?;
        stack.extend(d.1.iter().copied());
        tested.insert(id, d);
    }
    let mut succ: BTreeMap<Var, BTreeSet<Var>> = BTreeMap::new();
    for (var, targets) in tested.values() {
        let Some(x) = var else { continue };
        succ.entry(*x).or_default();
        for t in targets {
            if let Some(y) = tested[t].0 {
                if y == *x {
                    return None;
                }
                succ.entry(*x).or_default().insert(y);
            }
        }
    }
    let mut indeg: BTreeMap<Var, usize> = succ.keys().map(|&v| (v, 0)).collect();
    for ys in succ.values() {
        for y in ys {
            *indeg.entry(*y).or_default() += 1;
        }
    }
    let mut ready: BTreeSet<Var> = indeg.iter().filter(|(_, d)| **d == 0).map(|(v, _)| *v).collect();
    let mut order = Vec::with_capacity(indeg.len());
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for y in succ.get(&v).into_iter().flatten() {
            let d = indeg.get_mut(y).expect("successor registered");
            *d -= 1;
            if *d == 0 {
                ready.insert(*y);
            }
        }
    }
    if order.len() != indeg.len() {
        return None;
    }
    let seen: VarSet = order.iter().copied().collect();
    order.extend(c.universe().difference(&seen).iter());
    Some(order)
}

/// Greedy bottom-up merge of the ∧-gate partitions; verified before returning.
fn synthesize_vtree(c: &Circuit) -> Option<VTree> {
    let sets = c.varsets();
    let mut splits: Vec<Vec<VarSet>> = Vec::new();
    for n in c.nodes() {
        if let Node::And(cs) = n {
            splits.push(cs.iter().map(|ch| sets[ch.index()].clone()).collect());
        }
    }
    synthesize_from_splits(c.universe(), splits).filter(|t| t.is_respected_by(c))
}

/// Greedy v-tree over `universe` intended to respect every given split
/// (the variable sets of one ∧-gate's children). Splits with three or more
/// non-empty parts make the search fail. The caller verifies the result.
pub(crate) fn synthesize_from_splits(universe: &VarSet, splits: Vec<Vec<VarSet>>) -> Option<VTree> {
    if universe.is_empty() {
        return None;
    }
    let mut pairs: Vec<(VarSet, VarSet)> = Vec::new();
    for parts in splits {
        let parts: Vec<VarSet> = parts.into_iter().filter(|s| !s.is_empty()).collect();
        match <[VarSet; 2]>::try_from(parts) {
            Ok([a, b]) => pairs.push((a, b)),
            Err(p) if p.len() < 2 => {}
            Err(_) => return None,
        }
    }
    pairs.sort_by_key(|(a, b)| a.len() + b.len());
    pairs.dedup();

    // Forest of partial v-trees with a variable → tree map.
    let mut trees: Vec<Option<VTree>> = universe.iter().map(|v| Some(VTree::leaf(v))).collect();
    let mut owner: HashMap<Var, usize> = universe.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let owners = |s: &VarSet, owner: &HashMap<Var, usize>| -> Option<BTreeSet<usize>> {
        s.iter().map(|v| owner.get(&v).copied()).collect()
    };
    let merge = |ids: BTreeSet<usize>, trees: &mut Vec<Option<VTree>>, owner: &mut HashMap<Var, usize>| -> usize {
        let mut it = ids.into_iter();
        let first = it.next().expect("non-empty");
        for j in it {
            let a = trees[first].take().expect("live tree");
            let b = trees[j].take().expect("live tree");
            for v in b.leaves_in_order() {
                owner.insert(v, first);
            }
            trees[first] = VTree::join(a, b);
        }
        first
    };
    for (a, b) in &pairs {
        let (Some(oa), Some(ob)) = (owners(a, &owner), owners(b, &owner)) else {
            return None;
        };
        if !oa.is_disjoint(&ob) {
            continue;
        }
        let ta = merge(oa, &mut trees, &mut owner);
        let tb = merge(ob, &mut trees, &mut owner);
        let left = trees[ta].take().expect("live tree");
        let right = trees[tb].take().expect("live tree");
        for v in right.leaves_in_order() {
            owner.insert(v, ta);
        }
        trees[ta] = VTree::join(left, right);
    }
    let mut rest = trees.into_iter().flatten().rev();
    let mut t = rest.next()?;
    for s in rest {
        t = VTree::join(s, t)?;
    }
    Some(t)
}

impl Circuit {
    /// Every ∨-gate is a decision gate or has children proven disjoint.
    pub fn is_proven_deterministic(&self) -> bool {
        *self.proven_det.get_or_init(|| {
            let mut prover = super::DisjointnessProver::new(self, 1 << 20);
            self.node_ids().all(|id| match self.node(id) {
                Node::Or(cs) if cs.len() > 1 && self.decision_var(id).is_none() => {
                    cs.iter().enumerate().all(|(i, &a)| cs[i + 1..].iter().all(|&b| prover.disjoint(a, b)))
                }
                _ => true,
            })
        })
    }

    /// d-DNNF certification used by the counting queries.
    pub fn is_certified_deterministic(&self) -> bool {
        let p = self.properties();
        if p.all_or_decision || self.is_proven_deterministic() {
            return true;
        }
        self.num_vars() <= 12
            && matches!(super::check_determinism_semantic(self, 12), super::DeterminismVerdict::Deterministic)
    }

    /// Recomputes decomposability directly (test helper and assertion).
    pub fn and_gates_disjoint(&self) -> bool {
        let sets = self.varsets();
        self.nodes().iter().all(|n| match n {
            Node::And(cs) => {
                let cs: Vec<&VarSet> = cs.iter().map(|c| &sets[c.index()]).collect();
                (0..cs.len()).all(|i| (i + 1..cs.len()).all(|j| cs[i].is_disjoint(cs[j])))
            }
            _ => true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;

    #[test]
    fn guarded_report() {
        let c = crate::circuit::tests::guarded();
        let r = classify(&c, None);
        assert!(r.is_decomposable && r.is_nnf);
        assert!(!r.all_or_decision && !r.syntactic_deterministic && !r.proven_deterministic);
        assert!(r.obdd_order.is_none());
    }

    #[test]
    fn shared_variable_is_not_decomposable() {
        let mut b = CircuitBuilder::new();
        let x = b.lit(Lit::pos(Var(0)));
        let a = b.and(vec![x, x]);
        let c = b.finish(a, VarSet::range(1)).unwrap();
        assert!(!classify(&c, None).is_decomposable);
    }

    #[test]
    fn obdd_is_detected_with_order() {
        // x1 ? (x2 ? 1 : x3) : x3
        let mut b = CircuitBuilder::new();
        let x3 = b.lit(Lit::pos(Var(2)));
        let t = b.constant(true);
        let inner = b.decision(Var(1), x3, t);
        let root = b.decision(Var(0), x3, inner);
        let c = b.finish(root, VarSet::range(3)).unwrap();
        let r = classify(&c, None);
        assert_eq!(r.obdd_order, Some(vec![Var(0), Var(1), Var(2)]));
        assert!(r.all_or_decision && r.structured_witness.is_some());
        assert_eq!(r.class_name(), "OBDD");
    }

    #[test]
    fn hint_is_verified() {
        let mut b = CircuitBuilder::new();
        let x = b.lit(Lit::pos(Var(0)));
        let y = b.lit(Lit::pos(Var(1)));
        let z = b.lit(Lit::pos(Var(2)));
        let yz = b.and(vec![y, z]);
        let a = b.and(vec![x, yz]);
        let c = b.finish(a, VarSet::range(3)).unwrap();
        let good = VTree::right_linear(&[Var(0), Var(1), Var(2)]).unwrap();
        let bad = VTree::right_linear(&[Var(1), Var(0), Var(2)]).unwrap();
        assert!(classify(&c, Some(&good)).structured_witness.is_some());
        assert!(classify(&c, Some(&bad)).structured_witness.is_none());
        let synth = classify(&c, None).structured_witness.unwrap();
        assert!(synth.is_respected_by(&c));
    }
}
