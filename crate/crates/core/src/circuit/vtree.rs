use std::collections::HashMap;
use std::fmt;

use super::{Circuit, Node, Var, VarSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VTreeNode {
    Leaf(Var),
    Internal(usize, usize),
}

/// A full binary tree whose leaves are in bijection with a variable set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VTree {
    nodes: Vec<VTreeNode>,
    root: usize,
}

impl VTree {
    pub fn leaf(v: Var) -> VTree {
        VTree { nodes: vec![VTreeNode::Leaf(v)], root: 0 }
    }

    /// Internal node over two v-trees. Returns `None` if their variables overlap.
    pub fn join(left: VTree, right: VTree) -> Option<VTree> {
        if !left.vars().is_disjoint(&right.vars()) {
            return None;
        }
        let off = left.nodes.len();
        let mut nodes = left.nodes;
        nodes.extend(right.nodes.into_iter().map(|n| match n {
            VTreeNode::Internal(a, b) => VTreeNode::Internal(a + off, b + off),
            leaf => leaf,
        }));
        let root = nodes.len();
        nodes.push(VTreeNode::Internal(left.root, right.root + off));
        Some(VTree { nodes, root })
    }

    /// `(v1, (v2, (… vn)))`; `None` for an empty or repeating order.
    pub fn right_linear(order: &[Var]) -> Option<VTree> {
        let (&last, rest) = order.split_last()?;
        let mut t = VTree::leaf(last);
        for &v in rest.iter().rev() {
            t = VTree::join(VTree::leaf(v), t)?;
        }
        Some(t)
    }

    /// Builds from an arena, validating shape and leaf bijectivity.
    pub fn from_nodes(nodes: Vec<VTreeNode>, root: usize) -> Option<VTree> {
        let t = VTree { nodes, root };
        let mut seen_nodes = vec![false; t.nodes.len()];
        let mut seen_vars = VarSet::new();
        t.nodes.get(root)?;
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            if std::mem::replace(seen_nodes.get_mut(i)?, true) {
                return None;
            }
            match t.nodes[i] {
                VTreeNode::Leaf(v) => {
                    if !seen_vars.insert(v) {
                        return None;
                    }
                }
                VTreeNode::Internal(a, b) => stack.extend([a, b]),
            }
        }
        Some(t)
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[VTreeNode] {
        &self.nodes
    }

    pub fn vars(&self) -> VarSet {
        self.leaves_in_order().into_iter().collect()
    }

    /// Leaves from left to right.
    pub fn leaves_in_order(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            match self.nodes[i] {
                VTreeNode::Leaf(v) => out.push(v),
                VTreeNode::Internal(a, b) => stack.extend([b, a]),
            }
        }
        out
    }

    /// Whether one ∧-gate split, given by its children's variable sets,
    /// respects this v-tree.
    pub fn respects_split(&self, parts: &[VarSet]) -> bool {
        let idx = VTreeIndex::new(self);
        let parts: Vec<&VarSet> = parts.iter().filter(|s| !s.is_empty()).collect();
        idx.respects(&parts)
    }

    /// Whether every ∧-gate of `c` respects this v-tree.
    pub fn is_respected_by(&self, c: &Circuit) -> bool {
        if !c.universe().is_subset(&self.vars()) {
            return false;
        }
        let idx = VTreeIndex::new(self);
        let sets = c.varsets();
        c.nodes().iter().all(|n| match n {
            Node::And(cs) => {
                let parts: Vec<&VarSet> = cs.iter().map(|ch| &sets[ch.index()]).filter(|s| !s.is_empty()).collect();
                idx.respects(&parts)
            }
            _ => true,
        })
    }
}

impl fmt::Display for VTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &VTree, i: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t.nodes[i] {
                VTreeNode::Leaf(v) => write!(f, "{v}"),
                VTreeNode::Internal(a, b) => {
                    write!(f, "(")?;
                    go(t, a, f)?;
                    write!(f, " ")?;
                    go(t, b, f)?;
                    write!(f, ")")
                }
            }
        }
        go(self, self.root, f)
    }
}

/// Leaf positions and subtree intervals for split checks.
pub(crate) struct VTreeIndex<'a> {
    tree: &'a VTree,
    pos: HashMap<Var, usize>,
    span: Vec<(usize, usize)>,
}

impl<'a> VTreeIndex<'a> {
    pub(crate) fn new(tree: &'a VTree) -> Self {
        let leaves = tree.leaves_in_order();
        let pos: HashMap<Var, usize> = leaves.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut span = vec![(usize::MAX, 0); tree.nodes.len()];
        fn fill(t: &VTree, i: usize, pos: &HashMap<Var, usize>, span: &mut [(usize, usize)]) -> (usize, usize) {
            let s = match t.nodes[i] {
                VTreeNode::Leaf(v) => (pos[&v], pos[&v]),
                VTreeNode::Internal(a, b) => {
                    let l = fill(t, a, pos, span);
                    let r = fill(t, b, pos, span);
                    (l.0, r.1)
                }
            };
            span[i] = s;
            s
        }
        fill(tree, tree.root, &pos, &mut span);
        VTreeIndex { tree, pos, span }
    }

    fn set_span(&self, s: &VarSet) -> Option<(usize, usize)> {
        let mut lo = usize::MAX;
        let mut hi = 0;
        for v in s.iter() {
            let p = *self.pos.get(&v)?;
            lo = lo.min(p);
            hi = hi.max(p);
        }
        Some((lo, hi))
    }

    fn inside(inner: (usize, usize), outer: (usize, usize)) -> bool {
        outer.0 <= inner.0 && inner.1 <= outer.1
    }

    /// Checks one ∧-gate split given its children's non-empty variable sets.
    /// Only binary splits can respect a binary v-tree node.
    pub(crate) fn respects(&self, parts: &[&VarSet]) -> bool {
        match parts {
            [] => true,
            [one] => self.set_span(one).is_some(),
            [a, b] => {
                let (Some(sa), Some(sb)) = (self.set_span(a), self.set_span(b)) else {
                    return false;
                };
                let all = (sa.0.min(sb.0), sa.1.max(sb.1));
                let mut i = self.tree.root;
                loop {
                    match self.tree.nodes[i] {
                        VTreeNode::Leaf(_) => return false,
                        VTreeNode::Internal(l, r) => {
                            if Self::inside(all, self.span[l]) {
                                i = l;
                            } else if Self::inside(all, self.span[r]) {
                                i = r;
                            } else {
                                let (sl, sr) = (self.span[l], self.span[r]);
                                return (Self::inside(sa, sl) && Self::inside(sb, sr))
                                    || (Self::inside(sb, sl) && Self::inside(sa, sr));
                            }
                        }
                    }
                }
            }
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(ix: &[u32]) -> VarSet {
        ix.iter().map(|&i| Var(i)).collect()
    }

    #[test]
    fn right_linear_shape() {
        let t = VTree::right_linear(&[Var(0), Var(1), Var(2)]).unwrap();
        assert_eq!(t.to_string(), "(x1 (x2 x3))");
        assert_eq!(t.leaves_in_order(), vec![Var(0), Var(1), Var(2)]);
        let idx = VTreeIndex::new(&t);
        assert!(idx.respects(&[&vs(&[0]), &vs(&[1, 2])]));
        assert!(idx.respects(&[&vs(&[2]), &vs(&[1])]));
        assert!(!idx.respects(&[&vs(&[1]), &vs(&[0, 2])]));
        assert!(!idx.respects(&[&vs(&[0]), &vs(&[1]), &vs(&[2])]));
    }

    #[test]
    fn from_nodes_rejects_repeated_leaf() {
        let nodes = vec![VTreeNode::Leaf(Var(0)), VTreeNode::Leaf(Var(0)), VTreeNode::Internal(0, 1)];
        assert!(VTree::from_nodes(nodes, 2).is_none());
        assert!(VTree::join(VTree::leaf(Var(1)), VTree::leaf(Var(1))).is_none());
    }
}
