//! Relational circuits: ∪e/⋈ circuits over attributes with finite ordered
//! domains.
//!
//! An input `x/d` denotes the one-tuple relation `{x = d}`. Extended union
//! pads each child with the attributes it lacks before taking the union;
//! [`UnionSemantics`] selects whether padding ranges over the full domain or
//! uses a fixed default value per attribute.

mod classify;
mod count;
mod enumerate;
mod format;
mod transform;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::circuit::{Var, VarSet};
use crate::value::Value;

pub use classify::{classify_rel, RelReport};
pub use count::{count_rel, direct_access, RelIndex};
pub use enumerate::{enumerate_rel, tuples};
pub use format::{read_rel, write_rel};
pub use transform::{from_boolean, project_away, to_boolean};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrId(pub u32);

impl AttrId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn var(self) -> Var {
        Var(self.0)
    }

    pub(crate) fn of_var(v: Var) -> AttrId {
        AttrId(v.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    /// Strictly increasing; the order defines lexicographic semantics.
    pub domain: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    attrs: Vec<Attribute>,
    by_name: HashMap<String, AttrId>,
}

impl Schema {
    pub fn new(attrs: Vec<Attribute>) -> Result<Schema, RelError> {
        let mut by_name = HashMap::new();
        for (i, a) in attrs.iter().enumerate() {
            if a.domain.is_empty() {
                return Err(RelError::Schema(format!("attribute `{}` has an empty domain", a.name)));
            }
            if a.domain.windows(2).any(|w| w[0] >= w[1]) {
                return Err(RelError::Schema(format!("domain of `{}` is not strictly increasing", a.name)));
            }
            if by_name.insert(a.name.clone(), AttrId(i as u32)).is_some() {
                return Err(RelError::Schema(format!("duplicate attribute `{}`", a.name)));
            }
        }
        Ok(Schema { attrs, by_name })
    }

    /// Attributes with domain `[0, 1]`.
    pub fn boolean<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Schema {
        let attrs = names
            .into_iter()
            .map(|n| Attribute { name: n.into(), domain: vec![Value::Int(0), Value::Int(1)] })
            .collect();
        Schema::new(attrs).expect("distinct names")
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn attrs(&self) -> &[Attribute] {
        &self.attrs
    }

    pub fn ids(&self) -> impl Iterator<Item = AttrId> {
        (0..self.attrs.len() as u32).map(AttrId)
    }

    pub fn name(&self, a: AttrId) -> &str {
        &self.attrs[a.index()].name
    }

    pub fn domain(&self, a: AttrId) -> &[Value] {
        &self.attrs[a.index()].domain
    }

    pub fn domain_size(&self, a: AttrId) -> usize {
        self.attrs[a.index()].domain.len()
    }

    pub fn find(&self, name: &str) -> Option<AttrId> {
        self.by_name.get(name).copied()
    }

    pub fn value_index(&self, a: AttrId, v: &Value) -> Option<u32> {
        self.domain(a).binary_search(v).ok().map(|i| i as u32)
    }

    pub fn is_boolean(&self, a: AttrId) -> bool {
        self.domain(a) == [Value::Int(0), Value::Int(1)]
    }
}

/// How ∪e pads a child that lacks some of the union's attributes.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum UnionSemantics {
    /// Missing attributes range over their whole domain.
    #[default]
    FullDomain,
    /// Missing attributes take the given default (a domain index per attribute).
    ZeroSuppressed(Vec<u32>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelId(pub(crate) u32);

impl RelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RelNode {
    /// The relation `{attr = value}`, the value given as a domain index.
    Atom {
        attr: AttrId,
        value: u32,
    },
    Empty,
    /// The relation holding only the empty tuple.
    Unit,
    Union(Box<[RelId]>),
    Join(Box<[RelId]>),
}

impl RelNode {
    pub fn children(&self) -> &[RelId] {
        match self {
            RelNode::Union(cs) | RelNode::Join(cs) => cs,
            _ => &[],
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelError {
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("node {0} does not exist")]
    InvalidNode(u32),
    #[error("node {node} refers to later node {child}")]
    NotTopological { node: u32, child: u32 },
    #[error("attribute {0} is outside the circuit's attributes")]
    AttrOutsideUniverse(u32),
    #[error("value index {value} outside the domain of attribute {attr}")]
    DomainViolation { attr: u32, value: u32 },
    #[error("tuple does not cover attribute {0}")]
    MissingAttribute(u32),
    #[error("circuit is not countable: {0}")]
    NotCountable(String),
    #[error("circuit is not ordered: {0}")]
    NotOrdered(String),
    #[error("index {index} out of range (relation has {count} tuples)")]
    OutOfRange { index: String, count: String },
    #[error("circuit has a join with overlapping child attributes")]
    NotDecomposable,
    #[error("attribute {0} does not have domain {{0,1}}")]
    NonBooleanDomain(String),
    #[error("operation requires full-domain union semantics")]
    UnsupportedSemantics,
    #[error("boolean circuit is not in negation normal form")]
    NotNnf,
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// A tuple over an attribute set, values given as domain indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple {
    attrs: Vec<AttrId>,
    values: Vec<u32>,
}

impl Tuple {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (AttrId, u32)>) -> Tuple {
        let mut p: Vec<(AttrId, u32)> = pairs.into_iter().collect();
        p.sort();
        p.dedup_by_key(|x| x.0);
        let (attrs, values) = p.into_iter().unzip();
        Tuple { attrs, values }
    }

    /// Looks up each `(name, value)` in the schema.
    pub fn from_named<'a>(schema: &Schema, pairs: impl IntoIterator<Item = (&'a str, Value)>) -> Option<Tuple> {
        let p: Option<Vec<(AttrId, u32)>> = pairs
            .into_iter()
            .map(|(n, v)| {
                let a = schema.find(n)?;
                Some((a, schema.value_index(a, &v)?))
            })
            .collect();
        Some(Tuple::from_pairs(p?))
    }

    pub fn empty() -> Tuple {
        Tuple { attrs: Vec::new(), values: Vec::new() }
    }

    pub fn get(&self, a: AttrId) -> Option<u32> {
        self.attrs.binary_search(&a).ok().map(|i| self.values[i])
    }

    pub fn attrs(&self) -> &[AttrId] {
        &self.attrs
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AttrId, u32)> + '_ {
        self.attrs.iter().copied().zip(self.values.iter().copied())
    }

    /// Domain values in attribute order.
    pub fn decode(&self, schema: &Schema) -> Vec<Value> {
        self.iter().map(|(a, d)| schema.domain(a)[d as usize].clone()).collect()
    }

    /// Values listed in `order`; attributes missing from the tuple are skipped.
    pub fn key_in(&self, order: &[AttrId]) -> Vec<u32> {
        order.iter().filter_map(|&a| self.get(a)).collect()
    }

    pub fn display<'a>(&'a self, schema: &'a Schema) -> impl fmt::Display + 'a {
        struct D<'a>(&'a Tuple, &'a Schema);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "(")?;
                for (i, (a, d)) in self.0.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}={}", self.1.name(a), self.1.domain(a)[d as usize])?;
                }
                write!(f, ")")
            }
        }
        D(self, schema)
    }
}

/// Hash-consing builder for relational circuits.
#[derive(Default)]
pub struct RelBuilder {
    nodes: Vec<RelNode>,
    index: HashMap<RelNode, RelId>,
}

impl RelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, n: RelNode) -> RelId {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = RelId(self.nodes.len() as u32);
        self.nodes.push(n.clone());
        self.index.insert(n, id);
        id
    }

    pub fn node(&self, id: RelId) -> &RelNode {
        &self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn atom(&mut self, attr: AttrId, value: u32) -> RelId {
        self.add(RelNode::Atom { attr, value })
    }

    pub fn empty(&mut self) -> RelId {
        self.add(RelNode::Empty)
    }

    pub fn unit(&mut self) -> RelId {
        self.add(RelNode::Unit)
    }

    /// Union dropping empty children; collapses to a lone child or `Empty`.
    pub fn union(&mut self, kids: Vec<RelId>) -> RelId {
        let mut out: Vec<RelId> = Vec::with_capacity(kids.len());
        for k in kids {
            if self.nodes[k.index()] != RelNode::Empty && !out.contains(&k) {
                out.push(k);
            }
        }
        match out.len() {
            0 => self.empty(),
            1 => out[0],
            _ => self.add(RelNode::Union(out.into())),
        }
    }

    /// Join dropping unit children; any empty child makes it `Empty`.
    pub fn join(&mut self, kids: Vec<RelId>) -> RelId {
        let mut out: Vec<RelId> = Vec::with_capacity(kids.len());
        for k in kids {
            match self.nodes[k.index()] {
                RelNode::Empty => return self.empty(),
                RelNode::Unit => {}
                _ if out.contains(&k) => {}
                _ => out.push(k),
            }
        }
        match out.len() {
            0 => self.unit(),
            1 => out[0],
            _ => self.add(RelNode::Join(out.into())),
        }
    }

    /// Prunes nodes unreachable from `output` and validates against the schema.
    pub fn finish(
        self,
        output: RelId,
        schema: Arc<Schema>,
        universe: VarSet,
        semantics: UnionSemantics,
    ) -> Result<RelCircuit, RelError> {
        if output.index() >= self.nodes.len() {
            return Err(RelError::InvalidNode(output.0));
        }
        let mut keep = vec![false; self.nodes.len()];
        keep[output.index()] = true;
        for i in (0..self.nodes.len()).rev() {
            if keep[i] {
                for c in self.nodes[i].children() {
                    keep[c.index()] = true;
                }
            }
        }
        let mut remap = vec![u32::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, n) in self.nodes.into_iter().enumerate() {
            if !keep[i] {
                continue;
            }
            let m = |cs: &[RelId]| -> Box<[RelId]> { cs.iter().map(|c| RelId(remap[c.index()])).collect() };
            let n = match n {
                RelNode::Union(cs) => RelNode::Union(m(&cs)),
                RelNode::Join(cs) => RelNode::Join(m(&cs)),
                other => other,
            };
            remap[i] = nodes.len() as u32;
            nodes.push(n);
        }
        RelCircuit::new(schema, nodes, universe, semantics)
    }
}

/// A relational circuit; the output is the last node.
#[derive(Debug)]
pub struct RelCircuit {
    schema: Arc<Schema>,
    nodes: Vec<RelNode>,
    universe: VarSet,
    semantics: UnionSemantics,
    order: Option<Vec<AttrId>>,
    attrsets: OnceLock<Vec<VarSet>>,
}

impl Clone for RelCircuit {
    fn clone(&self) -> Self {
        RelCircuit {
            schema: self.schema.clone(),
            nodes: self.nodes.clone(),
            universe: self.universe.clone(),
            semantics: self.semantics.clone(),
            order: self.order.clone(),
            attrsets: OnceLock::new(),
        }
    }
}

impl RelCircuit {
    /// Validates topological order, attribute ranges and domain indices.
    pub fn new(
        schema: Arc<Schema>,
        nodes: Vec<RelNode>,
        universe: VarSet,
        semantics: UnionSemantics,
    ) -> Result<RelCircuit, RelError> {
        if universe.bound() > schema.len() {
            return Err(RelError::AttrOutsideUniverse(universe.bound() as u32 - 1));
        }
        if nodes.is_empty() {
            return Err(RelError::InvalidNode(0));
        }
        if let UnionSemantics::ZeroSuppressed(defaults) = &semantics {
            if defaults.len() != schema.len() {
                return Err(RelError::Schema("one default per attribute is required".into()));
            }
            for (a, &d) in schema.ids().zip(defaults) {
                if d as usize >= schema.domain_size(a) {
                    return Err(RelError::DomainViolation { attr: a.0, value: d });
                }
            }
        }
        for (i, n) in nodes.iter().enumerate() {
            match n {
                RelNode::Atom { attr, value } => {
                    if !universe.contains(attr.var()) {
                        return Err(RelError::AttrOutsideUniverse(attr.0));
                    }
                    if *value as usize >= schema.domain_size(*attr) {
                        return Err(RelError::DomainViolation { attr: attr.0, value: *value });
                    }
                }
                RelNode::Union(cs) | RelNode::Join(cs) => {
                    for c in cs.iter() {
                        if c.index() >= i {
                            return Err(RelError::NotTopological { node: i as u32, child: c.0 });
                        }
                    }
                }
                RelNode::Empty | RelNode::Unit => {}
            }
        }
        Ok(RelCircuit { schema, nodes, universe, semantics, order: None, attrsets: OnceLock::new() })
    }

    /// Attaches an attribute order; it must list each attribute of the
    /// universe exactly once.
    pub fn with_order(mut self, order: Vec<AttrId>) -> Result<RelCircuit, RelError> {
        let set: VarSet = order.iter().map(|a| a.var()).collect();
        if set.len() != order.len() || set != self.universe {
            return Err(RelError::NotOrdered("order must list every attribute once".into()));
        }
        self.order = Some(order);
        Ok(self)
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn nodes(&self) -> &[RelNode] {
        &self.nodes
    }

    pub fn node(&self, id: RelId) -> &RelNode {
        &self.nodes[id.index()]
    }

    pub fn output(&self) -> RelId {
        RelId(self.nodes.len() as u32 - 1)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Number of wires.
    pub fn size(&self) -> usize {
        self.nodes.iter().map(|n| n.children().len()).sum()
    }

    pub fn universe(&self) -> &VarSet {
        &self.universe
    }

    pub fn universe_attrs(&self) -> Vec<AttrId> {
        self.universe.iter().map(AttrId::of_var).collect()
    }

    pub fn semantics(&self) -> &UnionSemantics {
        &self.semantics
    }

    pub fn order(&self) -> Option<&[AttrId]> {
        self.order.as_deref()
    }

    /// `attr(g)` for every node.
    pub fn attrsets(&self) -> &[VarSet] {
        self.attrsets.get_or_init(|| {
            let mut out: Vec<VarSet> = Vec::with_capacity(self.nodes.len());
            for n in &self.nodes {
                let s = match n {
                    RelNode::Atom { attr, .. } => VarSet::singleton(attr.var()),
                    RelNode::Empty | RelNode::Unit => VarSet::new(),
                    RelNode::Union(cs) | RelNode::Join(cs) => {
                        let mut s = VarSet::new();
                        for c in cs.iter() {
                            s.union_with(&out[c.index()]);
                        }
                        s
                    }
                };
                out.push(s);
            }
            out
        })
    }

    pub fn attrset(&self, id: RelId) -> &VarSet {
        &self.attrsets()[id.index()]
    }

    /// Attributes of `outer` missing from `inner`, i.e. those padded by ∪e.
    pub(crate) fn padding(&self, outer: &VarSet, inner: &VarSet) -> Vec<AttrId> {
        outer.difference(inner).iter().map(AttrId::of_var).collect()
    }

    pub(crate) fn default_of(&self, a: AttrId) -> Option<u32> {
        match &self.semantics {
            UnionSemantics::FullDomain => None,
            UnionSemantics::ZeroSuppressed(d) => Some(d[a.index()]),
        }
    }

    /// Whether a join's children have pairwise disjoint attribute sets.
    pub fn is_cartesian(&self, id: RelId) -> bool {
        let RelNode::Join(cs) = self.node(id) else { return false };
        let sets = self.attrsets();
        let mut seen = VarSet::new();
        for c in cs.iter() {
            if !seen.is_disjoint(&sets[c.index()]) {
                return false;
            }
            seen.union_with(&sets[c.index()]);
        }
        true
    }

    /// For a branch `x/d` or a Cartesian `[x/d] ⋈ …`, the value `d` and the
    /// continuation children.
    pub(crate) fn branch_on(&self, id: RelId, x: AttrId) -> Option<(u32, Vec<RelId>)> {
        match self.node(id) {
            RelNode::Atom { attr, value } if *attr == x => Some((*value, Vec::new())),
            RelNode::Join(cs) if self.is_cartesian(id) => {
                let pos = cs.iter().position(|&c| matches!(self.node(c), RelNode::Atom { attr, .. } if *attr == x))?;
                let RelNode::Atom { value, .. } = self.node(cs[pos]) else { unreachable!() };
                let rest = cs.iter().enumerate().filter(|&(i, _)| i != pos).map(|(_, &c)| c).collect();
                Some((*value, rest))
            }
            _ => None,
        }
    }

    /// The attribute a union decides on, when it has the decision shape
    /// `⊎_d [x/d] ⋈ g_d` with distinct values `d`.
    pub fn decision_attr(&self, id: RelId) -> Option<AttrId> {
        let RelNode::Union(cs) = self.node(id) else { return None };
        let first = *cs.first()?;
        let candidates: Vec<AttrId> = match self.node(first) {
            RelNode::Atom { attr, .. } => vec![*attr],
            RelNode::Join(ks) => ks
                .iter()
                .filter_map(|&k| match self.node(k) {
                    RelNode::Atom { attr, .. } => Some(*attr),
                    _ => None,
                })
                .collect(),
            _ => return None,
        };
        candidates.into_iter().find(|&x| {
            let mut seen = Vec::with_capacity(cs.len());
            cs.iter().all(|&c| match self.branch_on(c, x) {
                Some((d, _)) if !seen.contains(&d) => {
                    seen.push(d);
                    true
                }
                _ => false,
            })
        })
    }

    /// Membership of `t` (restricted to the universe) in the relation.
    pub fn eval_rel(&self, t: &Tuple) -> Result<bool, RelError> {
        let mut val = vec![0u32; self.schema.len()];
        for a in self.universe.iter().map(AttrId::of_var) {
            let d = t.get(a).ok_or(RelError::MissingAttribute(a.0))?;
            if d as usize >= self.schema.domain_size(a) {
                return Err(RelError::DomainViolation { attr: a.0, value: d });
            }
            val[a.index()] = d;
        }
        let sets = self.attrsets();
        let padded_ok = |outer: &VarSet, inner: &VarSet| match &self.semantics {
            UnionSemantics::FullDomain => true,
            UnionSemantics::ZeroSuppressed(def) => {
                outer.difference(inner).iter().all(|v| val[v.index()] == def[v.index()])
            }
        };
        let mut member: Vec<bool> = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            let b = match n {
                RelNode::Atom { attr, value } => val[attr.index()] == *value,
                RelNode::Empty => false,
                RelNode::Unit => true,
                RelNode::Join(cs) => cs.iter().all(|c| member[c.index()]),
                RelNode::Union(cs) => cs.iter().any(|c| member[c.index()] && padded_ok(&sets[i], &sets[c.index()])),
            };
            member.push(b);
        }
        Ok(member[self.output().index()] && padded_ok(&self.universe, &sets[self.output().index()]))
    }

    /// Every tuple of the relation by exhaustive evaluation, for oracles.
    pub fn tuples_brute_force(&self) -> Vec<Tuple> {
        let attrs = self.universe_attrs();
        let sizes: Vec<u32> = attrs.iter().map(|&a| self.schema.domain_size(a) as u32).collect();
        let total: u64 = sizes.iter().map(|&s| s as u64).product();
        assert!(total <= 1 << 22, "brute force limited to 2^22 tuples");
        let mut out = Vec::new();
        let mut cur = vec![0u32; attrs.len()];
        for _ in 0..total {
            let t = Tuple { attrs: attrs.clone(), values: cur.clone() };
            if self.eval_rel(&t).expect("covers universe") {
                out.push(t);
            }
            for i in (0..cur.len()).rev() {
                cur[i] += 1;
                if cur[i] < sizes[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
        out
    }

    pub fn display_tuple<'a>(&'a self, t: &'a Tuple) -> impl fmt::Display + 'a {
        t.display(&self.schema)
    }
}
