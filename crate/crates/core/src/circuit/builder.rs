use std::collections::HashMap;

use super::{Circuit, CircuitError, Lit, Node, NodeId, VarSet};

/// Hash-consing constructor for circuits.
///
/// Every node is interned: adding a record equal to an existing one returns
/// the existing id. Children must be ids previously returned by this builder.
#[derive(Default)]
pub struct CircuitBuilder {
    nodes: Vec<Node>,
    index: HashMap<Node, NodeId>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns a node. Negations of inputs are folded into literals and
    /// constants, and double negations cancel.
    pub fn add(&mut self, node: Node) -> NodeId {
        debug_assert!(node.children().iter().all(|c| c.index() < self.nodes.len()));
        if let Node::Not(c) = node {
            match &self.nodes[c.index()] {
                Node::True => return self.add(Node::False),
                Node::False => return self.add(Node::True),
                Node::Lit(l) => return self.add(Node::Lit(l.negate())),
                Node::Not(g) => return *g,
                _ => {}
            }
        }
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn constant(&mut self, value: bool) -> NodeId {
        self.add(if value { Node::True } else { Node::False })
    }

    pub fn lit(&mut self, l: Lit) -> NodeId {
        self.add(Node::Lit(l))
    }

    pub fn and(&mut self, children: Vec<NodeId>) -> NodeId {
        self.add(Node::And(children.into_boxed_slice()))
    }

    pub fn or(&mut self, children: Vec<NodeId>) -> NodeId {
        self.add(Node::Or(children.into_boxed_slice()))
    }

    pub fn not(&mut self, child: NodeId) -> NodeId {
        self.add(Node::Not(child))
    }

    /// ∧ with constant propagation, duplicate removal and unary collapse.
    pub fn and_simplified(&mut self, children: impl IntoIterator<Item = NodeId>) -> NodeId {
        let mut kept: Vec<NodeId> = Vec::new();
        for c in children {
            match self.nodes[c.index()] {
                Node::True => {}
                Node::False => return self.constant(false),
                _ if kept.contains(&c) => {}
                _ => kept.push(c),
            }
        }
        match kept.len() {
            0 => self.constant(true),
            1 => kept[0],
            _ => self.and(kept),
        }
    }

    /// ∨ with constant propagation, duplicate removal and unary collapse.
    pub fn or_simplified(&mut self, children: impl IntoIterator<Item = NodeId>) -> NodeId {
        let mut kept: Vec<NodeId> = Vec::new();
        for c in children {
            match self.nodes[c.index()] {
                Node::False => {}
                Node::True => return self.constant(true),
                _ if kept.contains(&c) => {}
                _ => kept.push(c),
            }
        }
        match kept.len() {
            0 => self.constant(false),
            1 => kept[0],
            _ => self.or(kept),
        }
    }

    /// `(¬x ∧ low) ∨ (x ∧ high)`, simplified when a branch is constant false.
    pub fn decision(&mut self, var: super::Var, low: NodeId, high: NodeId) -> NodeId {
        let nx = self.lit(Lit::neg(var));
        let px = self.lit(Lit::pos(var));
        let l = self.and_simplified([nx, low]);
        let h = self.and_simplified([px, high]);
        self.or_simplified([l, h])
    }

    /// Freezes the subcircuit rooted at `output`, dropping unreachable nodes.
    pub fn finish(self, output: NodeId, universe: VarSet) -> Result<Circuit, CircuitError> {
        if output.index() >= self.nodes.len() {
            return Err(CircuitError::InvalidNode(output.0));
        }
        let n = output.index() + 1;
        let mut reach = vec![false; n];
        reach[output.index()] = true;
        for i in (0..n).rev() {
            if reach[i] {
                for c in self.nodes[i].children() {
                    reach[c.index()] = true;
                }
            }
        }
        let mut remap = vec![u32::MAX; n];
        let mut nodes = Vec::with_capacity(reach.iter().filter(|r| **r).count());
        for (i, node) in self.nodes.into_iter().take(n).enumerate() {
            if !reach[i] {
                continue;
            }
            if let Node::Lit(l) = &node {
                if !universe.contains(l.var()) {
                    return Err(CircuitError::VarOutsideUniverse(l.var()));
                }
            }
            let r = |c: &NodeId| NodeId(remap[c.index()]);
            let node = match node {
                Node::And(cs) => Node::And(cs.iter().map(r).collect()),
                Node::Or(cs) => Node::Or(cs.iter().map(r).collect()),
                Node::Not(c) => Node::Not(r(&c)),
                other => other,
            };
            remap[i] = nodes.len() as u32;
            nodes.push(node);
        }
        Ok(Circuit::from_parts_unchecked(nodes, universe))
    }
}
