use std::collections::HashMap;

use super::{Circuit, CircuitBuilder, CircuitError, Leaf, Lit, Node, NodeId, PartialValuation, Var, VarSet};

/// Pushes negations to the inputs with De Morgan's laws.
pub fn to_nnf(c: &Circuit) -> Circuit {
    let mut b = CircuitBuilder::new();
    let mut pos: Vec<NodeId> = Vec::with_capacity(c.num_nodes());
    let mut neg: Vec<NodeId> = Vec::with_capacity(c.num_nodes());
    for n in c.nodes() {
        let (p, q) = match n {
            Node::True | Node::False => {
                let v = matches!(n, Node::True);
                (b.constant(v), b.constant(!v))
            }
            Node::Lit(l) => (b.lit(*l), b.lit(l.negate())),
            Node::Not(ch) => (neg[ch.index()], pos[ch.index()]),
            Node::And(cs) => {
                let p = b.and(cs.iter().map(|ch| pos[ch.index()]).collect());
                let q = b.or(cs.iter().map(|ch| neg[ch.index()]).collect());
                (p, q)
            }
            Node::Or(cs) => {
                let p = b.or(cs.iter().map(|ch| pos[ch.index()]).collect());
                let q = b.and(cs.iter().map(|ch| neg[ch.index()]).collect());
                (p, q)
            }
        };
        pos.push(p);
        neg.push(q);
    }
    let out = pos[c.output().index()];
    b.finish(out, c.universe().clone()).expect("variables unchanged").with_names(c.names().clone())
}

/// Replaces the variables of `nu` by constants and simplifies in one pass.
///
/// The result's universe is the input universe minus the conditioned variables.
pub fn condition(c: &Circuit, nu: &PartialValuation) -> Circuit {
    let mut b = CircuitBuilder::new();
    let mut map: Vec<NodeId> = Vec::with_capacity(c.num_nodes());
    for n in c.nodes() {
        let id = match n {
            Node::Lit(l) => match nu.get(l.var()) {
                Some(v) => b.constant(l.eval(v)),
                None => b.lit(*l),
            },
            Node::True => b.constant(true),
            Node::False => b.constant(false),
            Node::Not(ch) => {
                let m = map[ch.index()];
                match b.node(m) {
                    Node::True => b.constant(false),
                    Node::False => b.constant(true),
                    _ => b.not(m),
                }
            }
            Node::And(cs) => b.and_simplified(cs.iter().map(|ch| map[ch.index()])),
            Node::Or(cs) => b.or_simplified(cs.iter().map(|ch| map[ch.index()])),
        };
        map.push(id);
    }
    let universe = c.universe().difference(&nu.0.keys().copied().collect());
    let names: Vec<(Var, String)> =
        c.names().iter().filter(|(v, _)| universe.contains(**v)).map(|(v, s)| (*v, s.clone())).collect();
    b.finish(map[c.output().index()], universe).expect("remaining literals stay in the universe").with_names(names)
}

/// Makes every ∨-gate smooth by conjoining `(¬x ∨ x)` gadgets for the
/// variables a child is missing.
///
/// When the child is already an ∧-gate the gadgets are appended to its
/// children, so decision branches keep their shape.
pub fn smooth(c: &Circuit) -> Result<Circuit, CircuitError> {
    let p = c.properties();
    if !p.is_nnf {
        return Err(CircuitError::NotNnf);
    }
    if !p.is_decomposable {
        return Err(CircuitError::NotDecomposable);
    }
    if p.is_smooth {
        return Ok(c.clone());
    }
    let sets = c.varsets();
    let mut s = Smoother { b: CircuitBuilder::new(), taut: HashMap::new(), gadget: HashMap::new() };
    let mut map: Vec<NodeId> = Vec::with_capacity(c.num_nodes());
    for (i, n) in c.nodes().iter().enumerate() {
        let id = match n {
            Node::Or(cs) => {
                let kids: Vec<NodeId> = cs
                    .iter()
                    .map(|ch| {
                        let missing = sets[i].difference(&sets[ch.index()]);
                        s.pad(map[ch.index()], &missing)
                    })
                    .collect();
                s.b.or(kids)
            }
            Node::And(cs) => s.b.and(cs.iter().map(|ch| map[ch.index()]).collect()),
            Node::Not(ch) => s.b.not(map[ch.index()]),
            leaf => s.b.add(leaf.clone()),
        };
        map.push(id);
    }
    let out = map[c.output().index()];
    Ok(s.b.finish(out, c.universe().clone())?.with_names(c.names().clone()))
}

struct Smoother {
    b: CircuitBuilder,
    taut: HashMap<VarSet, NodeId>,
    gadget: HashMap<Var, NodeId>,
}

impl Smoother {
    fn gadget(&mut self, v: Var) -> NodeId {
        if let Some(&g) = self.gadget.get(&v) {
            return g;
        }
        let n = self.b.lit(Lit::neg(v));
        let p = self.b.lit(Lit::pos(v));
        let g = self.b.or(vec![n, p]);
        self.gadget.insert(v, g);
        g
    }

    /// Right-nested conjunction of gadgets, shared by suffix.
    fn taut(&mut self, m: &VarSet) -> NodeId {
        if let Some(&t) = self.taut.get(m) {
            return t;
        }
        let v = m.min().expect("non-empty");
        let mut rest = m.clone();
        rest.remove(v);
        let g = self.gadget(v);
        let t = if rest.is_empty() {
            g
        } else {
            let r = self.taut(&rest);
            self.b.and(vec![g, r])
        };
        self.taut.insert(m.clone(), t);
        t
    }

    fn pad(&mut self, child: NodeId, missing: &VarSet) -> NodeId {
        if missing.is_empty() {
            return child;
        }
        let t = self.taut(missing);
        match self.b.node(child) {
            Node::And(cs) => {
                let mut cs = cs.to_vec();
                cs.push(t);
                self.b.and(cs)
            }
            _ => self.b.and(vec![child, t]),
        }
    }
}

impl Circuit {
    /// True when the output node is a constant after resolving negations.
    pub fn as_constant(&self) -> Option<bool> {
        match self.leaf(self.output()) {
            Some(Leaf::Const(b)) => Some(b),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{classify, CircuitBuilder, Valuation};

    fn truth_table(c: &Circuit, n: usize) -> Vec<bool> {
        let vars: Vec<Var> = (0..n as u32).map(Var).collect();
        (0u64..1 << n).map(|m| c.eval(&Valuation::from_mask(&vars, m))).collect()
    }

    #[test]
    fn de_morgan_nested() {
        // ¬(¬x ∨ (y ∧ ¬z))
        let mut b = CircuitBuilder::new();
        let nx = b.lit(Lit::neg(Var(0)));
        let y = b.lit(Lit::pos(Var(1)));
        let nz = b.lit(Lit::neg(Var(2)));
        let yz = b.and(vec![y, nz]);
        let o = b.or(vec![nx, yz]);
        let root = b.not(o);
        let c = b.finish(root, VarSet::range(3)).unwrap();
        assert!(!c.properties().is_nnf);
        let d = to_nnf(&c);
        assert!(d.properties().is_nnf);
        assert_eq!(truth_table(&c, 3), truth_table(&d, 3));
        match d.node(d.output()) {
            Node::And(cs) => {
                assert_eq!(d.node(cs[0]), &Node::Lit(Lit::pos(Var(0))));
                assert!(matches!(d.node(cs[1]), Node::Or(_)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nnf_is_identity_on_nnf() {
        let c = crate::circuit::tests::guarded();
        let d = to_nnf(&c);
        assert_eq!(c.nodes(), d.nodes());
    }

    #[test]
    fn conditioning_guarded_on_x2_false() {
        let c = crate::circuit::tests::guarded();
        let d = condition(&c, &PartialValuation::new().with(Var(1), false));
        assert_eq!(d.as_constant(), Some(false));
        assert!(!d.universe().contains(Var(1)));
        let e = condition(&c, &PartialValuation::new());
        assert_eq!(truth_table(&c, 4), truth_table(&e, 4));
    }

    #[test]
    fn smoothing_keeps_function_and_decisions() {
        // x ∨ (x' ∧ y): not deterministic, just checks padding.
        let mut b = CircuitBuilder::new();
        let x = b.lit(Lit::pos(Var(0)));
        let x2 = b.lit(Lit::pos(Var(1)));
        let y = b.lit(Lit::pos(Var(2)));
        let a = b.and(vec![x2, y]);
        let o = b.or(vec![x, a]);
        let c = b.finish(o, VarSet::range(3)).unwrap();
        let s = smooth(&c).unwrap();
        assert!(s.properties().is_smooth);
        assert_eq!(truth_table(&c, 3), truth_table(&s, 3));
        assert_eq!(truth_table(&s, 3).iter().filter(|b| **b).count(), 5);

        let mut b = CircuitBuilder::new();
        let y = b.lit(Lit::pos(Var(1)));
        let f = b.constant(false);
        let d = b.decision(Var(0), f, y);
        let t = b.constant(true);
        let root = b.decision(Var(2), d, t);
        let c = b.finish(root, VarSet::range(3)).unwrap();
        let s = smooth(&c).unwrap();
        let r = classify(&s, None);
        assert!(r.is_smooth && r.all_or_decision && r.is_decomposable);
        assert_eq!(truth_table(&c, 3), truth_table(&s, 3));
    }

    #[test]
    fn smooth_rejects_non_decomposable() {
        let mut b = CircuitBuilder::new();
        let x = b.lit(Lit::pos(Var(0)));
        let nx = b.lit(Lit::neg(Var(0)));
        let a = b.and(vec![x, nx]);
        let y = b.lit(Lit::pos(Var(1)));
        let o = b.or(vec![a, y]);
        let c = b.finish(o, VarSet::range(2)).unwrap();
        assert_eq!(smooth(&c).unwrap_err(), CircuitError::NotDecomposable);
    }
}
