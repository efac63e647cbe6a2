use num_rational::BigRational;

use super::{ProbTree, SigmaTree, TreeAutomaton, TreeError};
use crate::circuit::{Circuit, CircuitBuilder, Lit, NodeId, VTree, VTreeNode, Var, VarSet};
use crate::queries::{prepare_for_counting, wmc, RationalSemiring, WeightMap};

/// Gates `G[n][q]`: the subtree at `n` evaluates to state `q`, as a
/// function of the node variables. `sym(n, b)` is the label node `n` reads
/// when its variable is `b`.
fn build(a: &TreeAutomaton, t: &SigmaTree, sym: impl Fn(usize, bool) -> String) -> Result<(Circuit, VTree), TreeError> {
    if !a.is_deterministic() {
        return Err(TreeError::NondeterministicAutomaton);
    }
    let k = a.num_states();
    let mut b = CircuitBuilder::new();
    let mut g: Vec<Vec<Option<NodeId>>> = Vec::with_capacity(t.len());
    for n in 0..t.len() {
        let x = Var(n as u32);
        let lits = [b.lit(Lit::neg(x)), b.lit(Lit::pos(x))];
        let mut row = vec![None; k];
        match t.children(n) {
            None => {
                let q = [a.step_leaf(&sym(n, false))?, a.step_leaf(&sym(n, true))?];
                if q[0] == q[1] {
                    row[q[0] as usize] = Some(b.or(lits.to_vec()));
                } else {
                    row[q[0] as usize] = Some(lits[0]);
                    row[q[1] as usize] = Some(lits[1]);
                }
            }
            Some((l, r)) => {
                let mut branches: Vec<[Vec<NodeId>; 2]> = vec![[Vec::new(), Vec::new()]; k];
                for bit in [false, true] {
                    let label = sym(n, bit);
                    for (q1, gl) in g[l].iter().enumerate() {
                        let Some(gl) = *gl else { continue };
                        for (q2, gr) in g[r].iter().enumerate() {
                            let Some(gr) = *gr else { continue };
                            let q = a.step_internal(q1 as u32, q2 as u32, &label)?;
                            let pair = b.and(vec![gl, gr]);
                            branches[q as usize][bit as usize].push(pair);
                        }
                    }
                }
                for (q, [lo, hi]) in branches.into_iter().enumerate() {
                    let mut arms = Vec::with_capacity(2);
                    for (bit, pairs) in [lo, hi].into_iter().enumerate() {
                        let body = match pairs.len() {
                            0 => continue,
                            1 => pairs[0],
                            _ => b.or(pairs),
                        };
                        arms.push(b.and(vec![lits[bit], body]));
                    }
                    row[q] = match arms.len() {
                        0 => None,
                        1 => Some(arms[0]),
                        _ => Some(b.or(arms)),
                    };
                }
            }
        }
        g.push(row);
    }
    let accepted: Vec<NodeId> = (0..k).filter(|&q| a.is_accepting(q as u32)).filter_map(|q| g[t.root()][q]).collect();
    let out = match accepted.len() {
        0 => b.constant(false),
        1 => accepted[0],
        _ => b.or(accepted),
    };
    let names: Vec<(Var, String)> = (0..t.len()).map(|n| (Var(n as u32), format!("n{n}"))).collect();
    let c = b.finish(out, VarSet::range(t.len())).expect("node variables").with_names(names);
    Ok((c, tree_vtree(t)))
}

/// V-tree following the tree: node `n` splits into its own variable and the
/// variables of its two subtrees.
fn tree_vtree(t: &SigmaTree) -> VTree {
    let mut nodes = Vec::with_capacity(3 * t.len());
    let mut top: Vec<usize> = Vec::with_capacity(t.len());
    for n in 0..t.len() {
        nodes.push(VTreeNode::Leaf(Var(n as u32)));
        let own = nodes.len() - 1;
        let id = match t.children(n) {
            None => own,
            Some((l, r)) => {
                nodes.push(VTreeNode::Internal(top[l], top[r]));
                nodes.push(VTreeNode::Internal(own, nodes.len() - 1));
                nodes.len() - 1
            }
        };
        top.push(id);
    }
    let root = top[t.root()];
    VTree::from_nodes(nodes, root).expect("well-formed v-tree")
}

/// Provenance of the automaton on the probabilistic tree: variable `n` is
/// true when node `n` keeps its label and false when it takes the default.
pub fn provenance_tree(a: &TreeAutomaton, t: &SigmaTree) -> Result<(Circuit, VTree), TreeError> {
    build(a, t, |n, keep| if keep { t.label(n).to_string() } else { t.default_label().to_string() })
}

/// Probability that a random world of `pt` is accepted.
pub fn pqe_tree(a: &TreeAutomaton, pt: &ProbTree) -> Result<BigRational, TreeError> {
    let (c, _) = provenance_tree(a, &pt.tree)?;
    let w = WeightMap::probabilities(pt.probs().iter().enumerate().map(|(n, p)| (Var(n as u32), p.clone())));
    Ok(wmc(&*prepare_for_counting(&c)?, &w, &RationalSemiring)?)
}

/// Answer function of an automaton over annotated labels: variable `n` is
/// the membership of node `n` in the answer set.
pub fn answer_circuit(a: &TreeAutomaton, t: &SigmaTree) -> Result<(Circuit, VTree), TreeError> {
    build(a, t, |n, bit| super::annotate(t.label(n), bit))
}

#[cfg(test)]
mod tests {
    use num_bigint::BigUint;
    use num_traits::{One, Zero};

    use super::*;
    use crate::circuit::classify;
    use crate::queries::{enumerate, model_count};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn three_nodes_all_a() {
        let a = TreeAutomaton::exists_label("a", &["a", "e"]);
        let t = SigmaTree::complete(1, "a", "e");
        let (c, v) = provenance_tree(&a, &t).unwrap();
        let rep = classify(&c, Some(&v));
        assert!(rep.is_decomposable && rep.structured_witness.is_some());
        assert!(c.is_proven_deterministic());
        assert_eq!(model_count(&prepare_for_counting(&c).unwrap()).unwrap(), BigUint::from(7u8));
        let pt = ProbTree::uniform(t.clone(), r(1, 2)).unwrap();
        assert_eq!(pqe_tree(&a, &pt).unwrap(), r(7, 8));
        assert_eq!(
            pqe_tree(&a, &ProbTree::uniform(t.clone(), BigRational::one()).unwrap()).unwrap(),
            BigRational::one()
        );
        assert!(pqe_tree(&a, &ProbTree::uniform(t, BigRational::zero()).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn accept_all_is_true() {
        let a = TreeAutomaton::accept_all(&["a", "e"]);
        let t = SigmaTree::complete(2, "a", "e");
        let (c, _) = provenance_tree(&a, &t).unwrap();
        assert_eq!(model_count(&prepare_for_counting(&c).unwrap()).unwrap(), BigUint::from(1u32 << t.len()));
    }

    #[test]
    fn singleton_answers() {
        let a = TreeAutomaton::singleton(&["a", "e"]);
        let t = SigmaTree::complete(2, "a", "e");
        assert_eq!(t.len(), 7);
        let (c, v) = answer_circuit(&a, &t).unwrap();
        assert!(classify(&c, Some(&v)).structured_witness.is_some());
        let mut seen = Vec::new();
        enumerate(&c, |nu| {
            let ones = nu.true_vars();
            assert_eq!(ones.len(), 1);
            seen.push(ones[0]);
        })
        .unwrap();
        seen.sort();
        assert_eq!(seen, (0..7).map(Var).collect::<Vec<_>>());
    }

    #[test]
    fn marks_exactly_a_nodes() {
        let mut t = SigmaTree::complete(2, "e", "e");
        t.set_label(0, "a");
        t.set_label(4, "a");
        let a = TreeAutomaton::marks_label("a", &["a", "e"]);
        let (c, _) = answer_circuit(&a, &t).unwrap();
        let mut models = Vec::new();
        enumerate(&c, |nu| models.push(nu.true_vars())).unwrap();
        assert_eq!(models, vec![vec![Var(0), Var(4)]]);
    }

    #[test]
    fn nondeterministic_rejected() {
        let mut a = TreeAutomaton::new(["p", "q"]);
        a.add_leaf("a", "p").unwrap().add_leaf("a", "q").unwrap();
        let t = SigmaTree::complete(0, "a", "a");
        assert_eq!(provenance_tree(&a, &t).unwrap_err(), TreeError::NondeterministicAutomaton);
    }

    #[test]
    fn large_trees_are_certified() {
        let t = SigmaTree::complete(10, "a", "e");
        for a in [TreeAutomaton::exists_label("a", &["a", "e"]), TreeAutomaton::singleton(&["a", "e"])] {
            let (c, _) =
                if a.alphabet().contains("a:0") { answer_circuit(&a, &t) } else { provenance_tree(&a, &t) }.unwrap();
            assert!(c.is_proven_deterministic());
        }
    }
}
