use std::sync::Arc;

use super::classify::classify_rel;
use super::{AttrId, Attribute, RelBuilder, RelCircuit, RelError, RelId, RelNode, Schema, UnionSemantics};
use crate::circuit::{Circuit, Lit, Node, NodeId, Var, VarSet};
use crate::value::Value;

/// Existential projection: inputs on `attrs` become the unit relation and
/// the attributes leave the universe.
pub fn project_away(c: &RelCircuit, attrs: &[AttrId]) -> Result<RelCircuit, RelError> {
    if !classify_rel(c).decomposable {
        return Err(RelError::NotDecomposable);
    }
    let gone: VarSet = attrs.iter().map(|a| a.var()).collect();
    let mut b = RelBuilder::new();
    let mut map: Vec<RelId> = Vec::with_capacity(c.num_nodes());
    for n in c.nodes() {
        let id = match n {
            RelNode::Atom { attr, .. } if gone.contains(attr.var()) => b.unit(),
            RelNode::Atom { attr, value } => b.atom(*attr, *value),
            RelNode::Empty => b.empty(),
            RelNode::Unit => b.unit(),
            RelNode::Union(cs) => b.union(cs.iter().map(|k| map[k.index()]).collect()),
            RelNode::Join(cs) => b.join(cs.iter().map(|k| map[k.index()]).collect()),
        };
        map.push(id);
    }
    let universe = c.universe().difference(&gone);
    let out = b.finish(map[c.output().index()], c.schema().clone(), universe, c.semantics().clone())?;
    match c.order() {
        Some(o) => out.with_order(o.iter().copied().filter(|a| !gone.contains(a.var())).collect()),
        None => Ok(out),
    }
}

/// `x/1 ↦ x`, `x/0 ↦ ¬x`, `⋈ ↦ ∧`, `∪e ↦ ∨`. Gate shapes are kept.
pub fn to_boolean(c: &RelCircuit) -> Result<Circuit, RelError> {
    if *c.semantics() != UnionSemantics::FullDomain {
        return Err(RelError::UnsupportedSemantics);
    }
    for a in c.universe_attrs() {
        if !c.schema().is_boolean(a) {
            return Err(RelError::NonBooleanDomain(c.schema().name(a).to_string()));
        }
    }
    let nodes: Vec<Node> = c
        .nodes()
        .iter()
        .map(|n| match n {
            RelNode::Atom { attr, value } => Node::Lit(Lit::new(attr.var(), *value == 1)),
            RelNode::Empty => Node::False,
            RelNode::Unit => Node::True,
            RelNode::Union(cs) => Node::Or(cs.iter().map(|k| NodeId(k.0)).collect()),
            RelNode::Join(cs) => Node::And(cs.iter().map(|k| NodeId(k.0)).collect()),
        })
        .collect();
    let names: Vec<(Var, String)> =
        c.universe_attrs().into_iter().map(|a| (a.var(), c.schema().name(a).to_string())).collect();
    let out = Circuit::from_nodes(nodes, c.universe().clone()).expect("validated relational circuit");
    Ok(out.with_names(names))
}

/// Inverse of [`to_boolean`] for NNF circuits; attributes get domain `{0,1}`.
pub fn from_boolean(c: &Circuit) -> Result<RelCircuit, RelError> {
    let attrs = (0..c.universe().bound() as u32)
        .map(|i| Attribute { name: c.var_name(Var(i)), domain: vec![Value::Int(0), Value::Int(1)] })
        .collect();
    let schema = Arc::new(Schema::new(attrs)?);
    let mut b = RelBuilder::new();
    let mut map: Vec<RelId> = Vec::with_capacity(c.num_nodes());
    for n in c.nodes() {
        let id = match n {
            Node::True => b.unit(),
            Node::False => b.empty(),
            Node::Lit(l) => b.atom(AttrId(l.var().0), l.is_positive() as u32),
            Node::And(cs) => b.add(RelNode::Join(cs.iter().map(|k| map[k.index()]).collect())),
            Node::Or(cs) => b.add(RelNode::Union(cs.iter().map(|k| map[k.index()]).collect())),
            Node::Not(_) => return Err(RelError::NotNnf),
        };
        map.push(id);
    }
    b.finish(map[c.output().index()], schema, c.universe().clone(), UnionSemantics::FullDomain)
}
