mod common;

use std::collections::BTreeSet;

use common::*;
use kcdb::circuit::classify;
use kcdb::queries::enumerate;
use kcdb::tree::{
    annotate, answer_circuit, pqe_tree, provenance_tree, read_automaton, read_tree, write_automaton, write_tree,
    ProbTree, SigmaTree, TreeAutomaton, TreeError,
};
use num_rational::BigRational;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

const ALPHABET: [&str; 3] = ["a", "b", "e"];

/// A full binary tree with `leaves` leaves and random labels.
fn random_tree(g: &mut impl Rng, leaves: usize, alphabet: &[&str]) -> SigmaTree {
    fn build(g: &mut impl Rng, t: &mut SigmaTree, leaves: usize, alphabet: &[&str]) -> usize {
        let label = *alphabet.choose(g).unwrap();
        if leaves == 1 {
            return t.add_leaf(label);
        }
        let k = g.gen_range(1..leaves);
        let l = build(g, t, k, alphabet);
        let r = build(g, t, leaves - k, alphabet);
        t.add_internal(label, l, r)
    }
    let mut t = SigmaTree::new("e");
    build(g, &mut t, leaves, alphabet);
    t
}

/// A complete automaton; deterministic unless `extra` adds second targets.
fn random_automaton(g: &mut impl Rng, states: usize, alphabet: &[&str], extra: f64) -> TreeAutomaton {
    let names: Vec<String> = (0..states).map(|i| format!("q{i}")).collect();
    let mut a = TreeAutomaton::new(names.clone());
    let mut accepting = false;
    for q in &names {
        if g.gen_bool(0.5) {
            a.accept(q).unwrap();
            accepting = true;
        }
    }
    if !accepting {
        a.accept(&names[0]).unwrap();
    }
    for &l in alphabet {
        a.add_leaf(l, names.choose(g).unwrap()).unwrap();
        if g.gen_bool(extra) {
            a.add_leaf(l, names.choose(g).unwrap()).unwrap();
        }
        for x in &names {
            for y in &names {
                a.add_internal(x, y, l, names.choose(g).unwrap()).unwrap();
                if g.gen_bool(extra) {
                    a.add_internal(x, y, l, names.choose(g).unwrap()).unwrap();
                }
            }
        }
    }
    a
}

fn annotated_alphabet() -> Vec<String> {
    ALPHABET.iter().flat_map(|l| [annotate(l, false), annotate(l, true)]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn pqe_matches_world_enumeration(seed in any::<u64>(), leaves in 1usize..=6, states in 1usize..=3) {
        let mut g = rng(seed);
        let t = random_tree(&mut g, leaves, &ALPHABET);
        let a = random_automaton(&mut g, states, &ALPHABET, 0.0);
        let probs: Vec<BigRational> = (0..t.len()).map(|_| random_rational(&mut g, 5)).collect();
        let oracle = world_probability(&probs, |m| a.run(&t.world(|n| m >> n & 1 == 1)).unwrap());
        let pt = ProbTree::new(t.clone(), probs).unwrap();
        prop_assert_eq!(pqe_tree(&a, &pt).unwrap(), oracle);
        let (c, v) = provenance_tree(&a, &t).unwrap();
        let r = classify(&c, Some(&v));
        prop_assert!(r.is_d_dnnf() && r.structured_witness.is_some(), "class {}", r.class_name());
        prop_assert!(c.is_certified_deterministic());
    }

    #[test]
    fn determinization_preserves_acceptance(seed in any::<u64>(), leaves in 1usize..=8) {
        let mut g = rng(seed);
        let a = random_automaton(&mut g, 2, &ALPHABET, 0.3);
        let d = a.determinize(kcdb::tree::DETERMINIZE_CAP).unwrap();
        prop_assert!(d.is_deterministic());
        for _ in 0..8 {
            let t = random_tree(&mut g, leaves, &ALPHABET);
            prop_assert_eq!(d.run(&t).unwrap(), a.run(&t).unwrap());
        }
    }

    #[test]
    fn answer_circuits_select_the_accepted_node_sets(seed in any::<u64>(), leaves in 1usize..=5) {
        let mut g = rng(seed);
        let alpha = annotated_alphabet();
        let alpha: Vec<&str> = alpha.iter().map(String::as_str).collect();
        let t = random_tree(&mut g, leaves, &ALPHABET);
        let a = random_automaton(&mut g, 2, &alpha, 0.0);
        let (c, _) = answer_circuit(&a, &t).unwrap();
        let mut got = BTreeSet::new();
        enumerate(&c, |nu| {
            got.insert(nu.true_vars().iter().map(|v| v.index()).collect::<Vec<_>>());
        })
        .unwrap();
        let mut expected = BTreeSet::new();
        for m in 0u64..1 << t.len() {
            let mut marked = t.clone();
            for n in 0..t.len() {
                marked.set_label(n, annotate(t.label(n), m >> n & 1 == 1));
            }
            if a.run(&marked).unwrap() {
                expected.insert((0..t.len()).filter(|&n| m >> n & 1 == 1).collect::<Vec<_>>());
            }
        }
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn json_round_trips(seed in any::<u64>(), leaves in 1usize..=6) {
        let mut g = rng(seed);
        let t = random_tree(&mut g, leaves, &ALPHABET);
        let probs: Vec<BigRational> = (0..t.len()).map(|_| random_rational(&mut g, 7)).collect();
        let text = write_tree(&t, Some(&probs));
        let (back, p) = read_tree(&text).unwrap();
        prop_assert_eq!(back.labels(), t.labels());
        prop_assert_eq!(p, probs.into_iter().map(Some).collect::<Vec<_>>());
        let a = random_automaton(&mut g, 3, &ALPHABET, 0.2);
        let text = write_automaton(&a);
        prop_assert_eq!(write_automaton(&read_automaton(&text).unwrap()), text);
    }
}

#[test]
fn singleton_answers_are_the_nodes() {
    let t = SigmaTree::complete(2, "a", "e");
    let (c, _) = answer_circuit(&TreeAutomaton::singleton(&ALPHABET), &t).unwrap();
    let mut n = 0;
    enumerate(&c, |nu| {
        assert_eq!(nu.hamming_weight(), 1);
        n += 1;
    })
    .unwrap();
    assert_eq!(n, t.len());
}

#[test]
fn malformed_inputs() {
    assert!(matches!(read_tree("{\"default\": \"e\"}"), Err(TreeError::Json(_))));
    let one_child = r#"{"default": "e", "root": {"label": "a", "children": [{"label": "b"}]}}"#;
    assert!(matches!(read_tree(one_child), Err(TreeError::NotFull(..))));
    let no_prob = r#"{"default": "e", "root": {"label": "a"}}"#;
    assert!(matches!(ProbTree::from_json(no_prob), Err(TreeError::MissingProbability(0))));
    let bad_prob = r#"{"default": "e", "root": {"label": "a", "prob": "3/2"}}"#;
    assert!(matches!(ProbTree::from_json(bad_prob), Err(TreeError::InvalidProbability(_))));
    let nondet = r#"{"states": ["p", "q"], "accepting": ["q"], "leaf": [{"label": "a", "to": ["p", "q"]}]}"#;
    let a = read_automaton(nondet).unwrap();
    assert!(!a.is_deterministic());
    let t = SigmaTree::complete(0, "a", "e");
    assert!(matches!(provenance_tree(&a, &t), Err(TreeError::NondeterministicAutomaton)));
}
