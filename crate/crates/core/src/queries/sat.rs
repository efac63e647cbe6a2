use std::collections::BTreeMap;

use super::{require_dnnf, QueryError};
use crate::circuit::{Circuit, Node, NodeId, Valuation, Var};

/// Per-node satisfiability of a decomposable circuit, in one bottom-up pass.
pub(crate) fn sat_table(c: &Circuit) -> Vec<bool> {
    let mut sat = Vec::with_capacity(c.num_nodes());
    for n in c.nodes() {
        let s = match n {
            Node::True | Node::Lit(_) => true,
            Node::False => false,
            Node::And(cs) => cs.iter().all(|ch| sat[ch.index()]),
            Node::Or(cs) => cs.iter().any(|ch| sat[ch.index()]),
            Node::Not(_) => unreachable!("NNF checked"),
        };
        sat.push(s);
    }
    sat
}

pub fn satisfiable(c: &Circuit) -> Result<bool, QueryError> {
    require_dnnf(c)?;
    Ok(*sat_table(c).last().expect("non-empty"))
}

/// A satisfying valuation; variables not forced by the chosen branch are 0.
pub fn witness(c: &Circuit) -> Result<Option<Valuation>, QueryError> {
    require_dnnf(c)?;
    let sat = sat_table(c);
    if !sat[c.output().index()] {
        return Ok(None);
    }
    let mut assign: BTreeMap<Var, bool> = BTreeMap::new();
    let mut stack: Vec<NodeId> = vec![c.output()];
    while let Some(g) = stack.pop() {
        match c.node(g) {
            Node::Lit(l) => {
                assign.insert(l.var(), l.is_positive());
            }
            Node::And(cs) => stack.extend(cs.iter().copied()),
            Node::Or(cs) => stack.push(*cs.iter().find(|ch| sat[ch.index()]).expect("satisfiable child")),
            _ => {}
        }
    }
    let nu = Valuation::from_fn(c.universe(), |v| assign.get(&v).copied().unwrap_or(false));
    debug_assert!(c.eval(&nu));
    Ok(Some(nu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, VarSet};

    #[test]
    fn guarded_witness_satisfies() {
        let c = crate::circuit::tests::guarded();
        assert!(satisfiable(&c).unwrap());
        let nu = witness(&c).unwrap().unwrap();
        assert!(c.eval(&nu));
        assert_eq!(nu.bits(), "0100");
    }

    #[test]
    fn false_has_no_witness() {
        let c = Circuit::constant(false, VarSet::range(2));
        assert!(!satisfiable(&c).unwrap());
        assert_eq!(witness(&c).unwrap(), None);
        let mut b = CircuitBuilder::new();
        let f = b.constant(false);
        let o = b.or(vec![f, f]);
        let c = b.finish(o, VarSet::new()).unwrap();
        assert!(!satisfiable(&c).unwrap());
    }
}
