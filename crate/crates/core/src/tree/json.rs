//! JSON formats for trees and automata.
//!
//! ```text
//! tree:      {"default": "e", "root": NODE}
//! NODE:      {"label": "a", "prob": "1/2", "children": [NODE, NODE]}
//! automaton: {"states": ["q0", "q1"], "accepting": ["q1"],
//!             "leaf": [{"label": "a", "to": "q1"}],
//!             "internal": [{"left": "q0", "right": "q1", "label": "a", "to": "q1"}]}
//! ```
//!
//! `prob` is optional, given as a number or a string such as `"1/3"`. A
//! transition's `to` may be a list of states for nondeterministic automata.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::{ProbTree, SigmaTree, TreeAutomaton, TreeError};
use crate::value::parse_rational;

#[derive(Serialize, Deserialize)]
struct NodeSpec {
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prob: Option<Json>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<NodeSpec>,
}

#[derive(Serialize, Deserialize)]
struct TreeSpec {
    default: String,
    root: NodeSpec,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Targets {
    One(String),
    Many(Vec<String>),
}

impl Targets {
    fn list(&self) -> Vec<&str> {
        match self {
            Targets::One(s) => vec![s],
            Targets::Many(v) => v.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct LeafRule {
    label: String,
    to: Targets,
}

#[derive(Serialize, Deserialize)]
struct InternalRule {
    left: String,
    right: String,
    label: String,
    to: Targets,
}

#[derive(Serialize, Deserialize)]
struct AutomatonSpec {
    states: Vec<String>,
    accepting: Vec<String>,
    #[serde(default)]
    leaf: Vec<LeafRule>,
    #[serde(default)]
    internal: Vec<InternalRule>,
}

fn json_err(e: serde_json::Error) -> TreeError {
    TreeError::Json(e.to_string())
}

fn prob_of(j: &Json) -> Result<BigRational, TreeError> {
    let text = match j {
        Json::String(s) => s.clone(),
        Json::Number(n) => n.to_string(),
        other => return Err(TreeError::InvalidProbability(other.to_string())),
    };
    parse_rational(&text).ok_or(TreeError::InvalidProbability(text))
}

/// A tree with the probabilities given on its nodes, in node order.
pub fn read_tree(text: &str) -> Result<(SigmaTree, Vec<Option<BigRational>>), TreeError> {
    let spec: TreeSpec = serde_json::from_str(text).map_err(json_err)?;
    let mut t = SigmaTree::new(spec.default);
    let mut probs = Vec::new();
    fn go(
        s: &NodeSpec,
        path: &str,
        t: &mut SigmaTree,
        probs: &mut Vec<Option<BigRational>>,
    ) -> Result<usize, TreeError> {
        let p = s.prob.as_ref().map(prob_of).transpose()?;
        let id = match s.children.as_slice() {
            [] => t.add_leaf(s.label.clone()),
            [l, r] => {
                let l = go(l, &format!("{path}.0"), t, probs)?;
                let r = go(r, &format!("{path}.1"), t, probs)?;
                t.add_internal(s.label.clone(), l, r)
            }
            cs => return Err(TreeError::NotFull(path.to_string(), cs.len())),
        };
        probs.push(p);
        Ok(id)
    }
    go(&spec.root, "root", &mut t, &mut probs)?;
    Ok((t, probs))
}

impl ProbTree {
    /// Every node must carry a probability.
    pub fn from_json(text: &str) -> Result<ProbTree, TreeError> {
        let (t, probs) = read_tree(text)?;
        let probs: Vec<BigRational> = probs
            .into_iter()
            .enumerate()
            .map(|(n, p)| p.ok_or(TreeError::MissingProbability(n)))
            .collect::<Result<_, _>>()?;
        ProbTree::new(t, probs)
    }
}

pub fn write_tree(t: &SigmaTree, probs: Option<&[BigRational]>) -> String {
    fn go(t: &SigmaTree, n: usize, probs: Option<&[BigRational]>) -> NodeSpec {
        NodeSpec {
            label: t.label(n).to_string(),
            prob: probs.map(|p| Json::String(p[n].to_string())),
            children: match t.children(n) {
                None => Vec::new(),
                Some((l, r)) => vec![go(t, l, probs), go(t, r, probs)],
            },
        }
    }
    let spec = TreeSpec { default: t.default_label().to_string(), root: go(t, t.root(), probs) };
    serde_json::to_string_pretty(&spec).expect("serializable")
}

pub fn read_automaton(text: &str) -> Result<TreeAutomaton, TreeError> {
    let spec: AutomatonSpec = serde_json::from_str(text).map_err(json_err)?;
    let mut a = TreeAutomaton::new(spec.states);
    for q in &spec.accepting {
        a.accept(q)?;
    }
    for r in &spec.leaf {
        for to in r.to.list() {
            a.add_leaf(&r.label, to)?;
        }
    }
    for r in &spec.internal {
        for to in r.to.list() {
            a.add_internal(&r.left, &r.right, &r.label, to)?;
        }
    }
    Ok(a)
}

pub fn write_automaton(a: &TreeAutomaton) -> String {
    let name = |q: u32| a.state_name(q).to_string();
    let targets = |s: &std::collections::BTreeSet<u32>| match s.len() {
        1 => Targets::One(name(*s.first().expect("one"))),
        _ => Targets::Many(s.iter().map(|&q| name(q)).collect()),
    };
    let spec = AutomatonSpec {
        states: (0..a.num_states() as u32).map(name).collect(),
        accepting: a.accepting_set().iter().map(|&q| name(q)).collect(),
        leaf: a.leaf_map().iter().map(|(l, s)| LeafRule { label: l.clone(), to: targets(s) }).collect(),
        internal: a
            .internal_map()
            .iter()
            .map(|((x, y, l), s)| InternalRule { left: name(*x), right: name(*y), label: l.clone(), to: targets(s) })
            .collect(),
    };
    serde_json::to_string_pretty(&spec).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_round_trip() {
        let text = r#"{"default": "e", "root": {"label": "a", "prob": 0.5,
            "children": [{"label": "b", "prob": "1/3"}, {"label": "a", "prob": 1}]}}"#;
        let pt = ProbTree::from_json(text).unwrap();
        assert_eq!(pt.tree.len(), 3);
        assert_eq!(pt.tree.label(0), "b");
        assert_eq!(*pt.prob(0), BigRational::new(1.into(), 3.into()));
        let again = ProbTree::from_json(&write_tree(&pt.tree, Some(pt.probs()))).unwrap();
        assert_eq!(again, pt);
        let bad = r#"{"default": "e", "root": {"label": "a", "children": [{"label": "b"}]}}"#;
        assert_eq!(read_tree(bad).unwrap_err(), TreeError::NotFull("root".into(), 1));
        let missing = r#"{"default": "e", "root": {"label": "a"}}"#;
        assert_eq!(ProbTree::from_json(missing).unwrap_err(), TreeError::MissingProbability(0));
    }

    #[test]
    fn automaton_round_trip() {
        let a = TreeAutomaton::exists_label("a", &["a", "e"]);
        let back = read_automaton(&write_automaton(&a)).unwrap();
        assert_eq!(back, a);
        let bad = r#"{"states": ["q"], "accepting": ["p"]}"#;
        assert_eq!(read_automaton(bad).unwrap_err(), TreeError::UnknownState("p".into()));
    }
}
