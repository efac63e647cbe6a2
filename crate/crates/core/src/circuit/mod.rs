//! Boolean circuits over literals and constants with ∧, ∨ and ¬ gates.
//!
//! A [`Circuit`] is an immutable DAG whose nodes are stored in topological
//! order (children before parents) with the output last. Circuits are built
//! through a hash-consing [`CircuitBuilder`], so structurally identical node
//! records always share one [`NodeId`].

mod builder;
mod classify;
mod determinism;
mod format;
mod transform;
mod varset;
mod vtree;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

pub use builder::CircuitBuilder;
pub use classify::{classify, ClassReport, Properties};
pub use determinism::{check_determinism_semantic, DeterminismVerdict};
pub use format::{read_nnf, write_nnf};
pub use transform::{condition, smooth, to_nnf};
pub use varset::VarSet;
pub use vtree::{VTree, VTreeNode};

pub(crate) use classify::synthesize_from_splits;
pub(crate) use determinism::DisjointnessProver;

/// A Boolean variable, identified by a dense index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0 + 1)
    }
}

/// A variable or its negation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Lit {
    var: Var,
    positive: bool,
}

impl Lit {
    pub fn new(var: Var, positive: bool) -> Self {
        Lit { var, positive }
    }

    pub fn pos(var: Var) -> Self {
        Lit::new(var, true)
    }

    pub fn neg(var: Var) -> Self {
        Lit::new(var, false)
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn negate(self) -> Self {
        Lit::new(self.var, !self.positive)
    }

    /// DIMACS convention: variable `v` is the 1-based integer `v+1`.
    pub fn from_dimacs(l: i64) -> Option<Self> {
        if l == 0 {
            return None;
        }
        Some(Lit::new(Var((l.unsigned_abs() - 1) as u32), l > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var.0 as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }

    /// Value of the literal under an assignment of its variable.
    pub fn eval(self, value: bool) -> bool {
        value == self.positive
    }
}

/// Index of a node inside one circuit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Node {
    True,
    False,
    Lit(Lit),
    And(Box<[NodeId]>),
    Or(Box<[NodeId]>),
    Not(NodeId),
}

impl Node {
    pub fn children(&self) -> &[NodeId] {
        match self {
            Node::And(cs) | Node::Or(cs) => cs,
            Node::Not(c) => std::slice::from_ref(c),
            _ => &[],
        }
    }
}

/// Input-level view of a node: a constant or a literal, possibly reached
/// through a negation of an input.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Leaf {
    Const(bool),
    Lit(Lit),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("invalid node id {0}")]
    InvalidNode(u32),
    #[error("child {child} of node {node} does not precede it")]
    NotTopological { node: u32, child: u32 },
    #[error("variable {0} is not in the circuit's variable universe")]
    VarOutsideUniverse(Var),
    #[error("circuit is not decomposable")]
    NotDecomposable,
    #[error("circuit is not in negation normal form")]
    NotNnf,
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// A frozen Boolean circuit.
pub struct Circuit {
    nodes: Vec<Node>,
    universe: VarSet,
    names: BTreeMap<Var, String>,
    varsets: OnceLock<Vec<VarSet>>,
    properties: OnceLock<Properties>,
    proven_det: OnceLock<bool>,
}

impl Clone for Circuit {
    fn clone(&self) -> Self {
        Circuit {
            nodes: self.nodes.clone(),
            universe: self.universe.clone(),
            names: self.names.clone(),
            varsets: OnceLock::new(),
            properties: OnceLock::new(),
            proven_det: OnceLock::new(),
        }
    }
}

impl fmt::Debug for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Circuit").field("nodes", &self.nodes).field("universe", &self.universe).finish()
    }
}

impl Circuit {
    /// Builds a circuit from nodes already in topological order; the last
    /// node is the output. Unreachable nodes are dropped.
    pub fn from_nodes(nodes: Vec<Node>, universe: VarSet) -> Result<Circuit, CircuitError> {
        let mut b = CircuitBuilder::new();
        let mut map = Vec::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            for c in n.children() {
                if c.index() >= i {
                    return Err(CircuitError::NotTopological { node: i as u32, child: c.0 });
                }
            }
            let mapped = match n {
                Node::And(cs) => Node::And(cs.iter().map(|c| map[c.index()]).collect()),
                Node::Or(cs) => Node::Or(cs.iter().map(|c| map[c.index()]).collect()),
                Node::Not(c) => Node::Not(map[c.index()]),
                other => other.clone(),
            };
            map.push(b.add(mapped));
        }
        let out = *map.last().ok_or(CircuitError::InvalidNode(0))?;
        b.finish(out, universe)
    }

    pub(crate) fn from_parts_unchecked(nodes: Vec<Node>, universe: VarSet) -> Circuit {
        Circuit {
            nodes,
            universe,
            names: BTreeMap::new(),
            varsets: OnceLock::new(),
            properties: OnceLock::new(),
            proven_det: OnceLock::new(),
        }
    }

    /// Constant circuit over the given universe.
    pub fn constant(value: bool, universe: VarSet) -> Circuit {
        let node = if value { Node::True } else { Node::False };
        Circuit::from_parts_unchecked(vec![node], universe)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn output(&self) -> NodeId {
        NodeId(self.nodes.len() as u32 - 1)
    }

    pub fn node_ids(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn universe(&self) -> &VarSet {
        &self.universe
    }

    pub fn num_vars(&self) -> usize {
        self.universe.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// |C|: the number of edges of the DAG.
    pub fn size(&self) -> usize {
        self.nodes.iter().map(|n| n.children().len()).sum()
    }

    pub fn with_names(mut self, names: impl IntoIterator<Item = (Var, String)>) -> Self {
        self.names.extend(names);
        self
    }

    pub fn var_name(&self, v: Var) -> String {
        self.names.get(&v).cloned().unwrap_or_else(|| v.to_string())
    }

    pub fn names(&self) -> &BTreeMap<Var, String> {
        &self.names
    }

    /// Resolves constants, literals and negated inputs.
    pub fn leaf(&self, id: NodeId) -> Option<Leaf> {
        match &self.nodes[id.index()] {
            Node::True => Some(Leaf::Const(true)),
            Node::False => Some(Leaf::Const(false)),
            Node::Lit(l) => Some(Leaf::Lit(*l)),
            Node::Not(c) => match self.leaf(*c)? {
                Leaf::Const(b) => Some(Leaf::Const(!b)),
                Leaf::Lit(l) => Some(Leaf::Lit(l.negate())),
            },
            _ => None,
        }
    }

    /// var(g) for every node, computed once.
    pub fn varsets(&self) -> &[VarSet] {
        self.varsets.get_or_init(|| {
            let mut sets: Vec<VarSet> = Vec::with_capacity(self.nodes.len());
            for n in &self.nodes {
                let s = match n {
                    Node::Lit(l) => VarSet::singleton(l.var()),
                    Node::True | Node::False => VarSet::new(),
                    _ => {
                        let mut s = VarSet::new();
                        for c in n.children() {
                            s.union_with(&sets[c.index()]);
                        }
                        s
                    }
                };
                sets.push(s);
            }
            sets
        })
    }

    pub fn varset(&self, id: NodeId) -> Result<&VarSet, CircuitError> {
        self.varsets().get(id.index()).ok_or(CircuitError::InvalidNode(id.0))
    }

    /// Cheap structural properties, computed once.
    pub fn properties(&self) -> &Properties {
        self.properties.get_or_init(|| Properties::compute(self))
    }

    /// Evaluates every node under a total assignment.
    pub fn eval_all(&self, value: impl Fn(Var) -> bool) -> Vec<bool> {
        let mut vals: Vec<bool> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let v = match n {
                Node::True => true,
                Node::False => false,
                Node::Lit(l) => l.eval(value(l.var())),
                Node::And(cs) => cs.iter().all(|c| vals[c.index()]),
                Node::Or(cs) => cs.iter().any(|c| vals[c.index()]),
                Node::Not(c) => !vals[c.index()],
            };
            vals.push(v);
        }
        vals
    }

    pub fn eval_with(&self, value: impl Fn(Var) -> bool) -> bool {
        *self.eval_all(value).last().expect("circuits are non-empty")
    }

    /// Evaluates the circuit; variables absent from the valuation read as 0.
    pub fn eval(&self, nu: &Valuation) -> bool {
        let mut dense = vec![false; self.universe.bound().max(nu.bound())];
        for (v, b) in nu.iter() {
            dense[v.index()] = b;
        }
        self.eval_with(|v| dense.get(v.index()).copied().unwrap_or(false))
    }

    /// Decision variable of an ∨-gate of shape `(¬x ∧ g0) ∨ (x ∧ g1)`.
    ///
    /// A child may also be the bare literal, standing for `(x ∧ 1)`.
    pub fn decision_var(&self, id: NodeId) -> Option<Var> {
        let Node::Or(cs) = &self.nodes[id.index()] else {
            return None;
        };
        if cs.len() != 2 {
            return None;
        }
        let a = self.carried_literals(cs[0]);
        let b = self.carried_literals(cs[1]);
        a.iter().find(|l| b.contains(&l.negate())).map(|l| l.var())
    }

    /// The branch literal and continuation children of one decision branch.
    pub(crate) fn carried_literals(&self, id: NodeId) -> Vec<Lit> {
        if let Some(Leaf::Lit(l)) = self.leaf(id) {
            return vec![l];
        }
        match &self.nodes[id.index()] {
            Node::And(cs) => cs
                .iter()
                .filter_map(|c| match self.leaf(*c) {
                    Some(Leaf::Lit(l)) => Some(l),
                    _ => None,
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Brute-force satisfying set over the universe, for small universes.
    pub fn models_brute_force(&self) -> Vec<Valuation> {
        let vars = self.universe.to_vec();
        assert!(vars.len() <= 24, "brute force limited to 24 variables");
        (0u64..1 << vars.len()).map(|m| Valuation::from_mask(&vars, m)).filter(|nu| self.eval(nu)).collect()
    }
}

/// A total assignment over a declared variable set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Valuation {
    vars: Vec<Var>,
    values: Vec<bool>,
}

impl Valuation {
    /// Pairs need not be sorted; duplicate variables keep the last value.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, bool)>) -> Self {
        let map: BTreeMap<Var, bool> = pairs.into_iter().collect();
        Valuation { vars: map.keys().copied().collect(), values: map.values().copied().collect() }
    }

    pub fn from_fn(universe: &VarSet, f: impl Fn(Var) -> bool) -> Self {
        let vars = universe.to_vec();
        let values = vars.iter().map(|&v| f(v)).collect();
        Valuation { vars, values }
    }

    /// Bit `i` of the mask is the value of the `i`-th smallest variable.
    pub fn from_mask(sorted_vars: &[Var], mask: u64) -> Self {
        Valuation { vars: sorted_vars.to_vec(), values: (0..sorted_vars.len()).map(|i| mask >> i & 1 == 1).collect() }
    }

    /// Parallel slices; `vars` must be sorted and distinct.
    pub fn from_values(vars: &[Var], values: &[bool]) -> Self {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]) && vars.len() == values.len());
        Valuation { vars: vars.to_vec(), values: values.to_vec() }
    }

    pub fn get(&self, v: Var) -> Option<bool> {
        self.vars.binary_search(&v).ok().map(|i| self.values[i])
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.vars.iter().copied().zip(self.values.iter().copied())
    }

    pub fn true_vars(&self) -> Vec<Var> {
        self.iter().filter(|(_, b)| *b).map(|(v, _)| v).collect()
    }

    pub fn hamming_weight(&self) -> usize {
        self.values.iter().filter(|b| **b).count()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    fn bound(&self) -> usize {
        self.vars.last().map_or(0, |v| v.index() + 1)
    }

    /// Bitstring in variable order, e.g. `0101`.
    pub fn bits(&self) -> String {
        self.values.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Valuation({})", self.bits())
    }
}

/// A partial assignment, used for conditioning.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialValuation(pub BTreeMap<Var, bool>);

impl PartialValuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, v: Var, b: bool) -> Self {
        self.0.insert(v, b);
        self
    }

    pub fn get(&self, v: Var) -> Option<bool> {
        self.0.get(&v).copied()
    }
}

impl FromIterator<(Var, bool)> for PartialValuation {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> Self {
        PartialValuation(iter.into_iter().collect())
    }
}

/// A formula in disjunctive normal form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DnfFormula {
    terms: Vec<Vec<Lit>>,
}

impl DnfFormula {
    /// Terms are sorted and deduplicated; a term holding both polarities of
    /// a variable is rejected.
    pub fn new(terms: impl IntoIterator<Item = Vec<Lit>>) -> Result<Self, Var> {
        let mut out = Vec::new();
        for mut t in terms {
            t.sort();
            t.dedup();
            if let Some(w) = t.windows(2).find(|w| w[0].var() == w[1].var()) {
                return Err(w[0].var());
            }
            out.push(t);
        }
        Ok(DnfFormula { terms: out })
    }

    pub fn terms(&self) -> &[Vec<Lit>] {
        &self.terms
    }

    pub fn vars(&self) -> VarSet {
        self.terms.iter().flatten().map(|l| l.var()).collect()
    }

    pub fn eval_with(&self, value: impl Fn(Var) -> bool) -> bool {
        self.terms.iter().any(|t| t.iter().all(|l| l.eval(value(l.var()))))
    }
}
