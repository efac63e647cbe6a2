//! Random instance generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use kcdb::circuit::{Circuit, CircuitBuilder, Lit, NodeId, Valuation, Var, VarSet};
use kcdb::cnf::CnfFormula;
use kcdb::cq::{Atom, ConjunctiveQuery, Database, Term};
use kcdb::queries::WeightMap;
use kcdb::value::Value;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// A random DNNF over `vars`. With `deterministic`, every ∨-gate is a
/// decision gate; otherwise some ∨-gates join overlapping children.
pub fn random_dnnf(rng: &mut impl Rng, universe: usize, deterministic: bool) -> Circuit {
    let mut b = CircuitBuilder::new();
    let vars: Vec<Var> = (0..universe as u32).map(Var).collect();
    let out = gen(rng, &mut b, &vars, deterministic, 0);
    b.finish(out, VarSet::range(universe)).expect("valid circuit")
}

fn gen(rng: &mut impl Rng, b: &mut CircuitBuilder, vars: &[Var], det: bool, depth: usize) -> NodeId {
    if vars.is_empty() || depth > 6 || rng.gen_bool(0.15) {
        return match vars.choose(rng) {
            Some(&v) if rng.gen_bool(0.8) => b.lit(Lit::new(v, rng.gen())),
            _ => b.constant(rng.gen_bool(0.7)),
        };
    }
    match rng.gen_range(0..10) {
        0..=2 if vars.len() >= 2 => {
            let mut vs = vars.to_vec();
            vs.shuffle(rng);
            let k = rng.gen_range(1..vs.len());
            let (l, r) = vs.split_at(k);
            let a = gen(rng, b, l, det, depth + 1);
            let c = gen(rng, b, r, det, depth + 1);
            b.and(vec![a, c])
        }
        3 if !det => {
            let a = gen(rng, b, vars, det, depth + 1);
            let c = gen(rng, b, vars, det, depth + 1);
            b.or(vec![a, c])
        }
        _ => {
            let i = rng.gen_range(0..vars.len());
            let x = vars[i];
            let rest: Vec<Var> = vars.iter().copied().filter(|&v| v != x).collect();
            let lo = gen(rng, b, &rest, det, depth + 1);
            let hi = gen(rng, b, &rest, det, depth + 1);
            let nx = b.lit(Lit::neg(x));
            let px = b.lit(Lit::pos(x));
            let l = b.and(vec![nx, lo]);
            let h = b.and(vec![px, hi]);
            b.or(vec![l, h])
        }
    }
}

pub fn random_cnf(rng: &mut impl Rng, n: usize, m: usize, width: usize) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=width.min(n));
            let mut vs: Vec<u32> = (0..n as u32).collect();
            vs.shuffle(rng);
            vs[..k].iter().map(|&v| Lit::new(Var(v), rng.gen())).collect()
        })
        .collect();
    CnfFormula::new(n, clauses)
}

/// Every valuation of `universe`, in mask order.
pub fn all_valuations(universe: &VarSet) -> Vec<Valuation> {
    let vars = universe.to_vec();
    assert!(vars.len() <= 20);
    (0..1u64 << vars.len()).map(|m| Valuation::from_mask(&vars, m)).collect()
}

pub fn models(c: &Circuit) -> BTreeSet<Valuation> {
    all_valuations(c.universe()).into_iter().filter(|nu| c.eval(nu)).collect()
}

pub fn random_rational(rng: &mut impl Rng, max_den: i64) -> BigRational {
    let d = rng.gen_range(1..=max_den);
    r(rng.gen_range(0..=d), d)
}

/// Strictly positive literal weights.
pub fn random_weights(rng: &mut impl Rng, universe: &VarSet) -> WeightMap<BigRational> {
    let mut w = WeightMap::new();
    for v in universe.iter() {
        w.set(v, r(rng.gen_range(1..10), rng.gen_range(1..6)), r(rng.gen_range(1..10), rng.gen_range(1..6)));
    }
    w
}

pub fn weight_of(nu: &Valuation, w: &WeightMap<BigRational>) -> BigRational {
    nu.iter().fold(BigRational::one(), |acc, (v, b)| acc * w.get(Lit::new(v, b)).expect("weight"))
}

pub fn wmc_oracle(c: &Circuit, w: &WeightMap<BigRational>) -> BigRational {
    models(c).iter().map(|nu| weight_of(nu, w)).fold(BigRational::zero(), |a, b| a + b)
}

/// A random acyclic query: each atom after the first shares some variables
/// with one earlier atom and adds fresh ones.
pub fn random_acyclic_body(rng: &mut impl Rng, atoms: usize) -> Vec<Atom> {
    let mut out: Vec<Vec<String>> = Vec::new();
    let mut next = 0;
    let fresh = |k: usize, next: &mut usize| -> Vec<String> {
        (0..k)
            .map(|_| {
                *next += 1;
                format!("v{}", *next - 1)
            })
            .collect()
    };
    for i in 0..atoms {
        let mut vars = if i == 0 {
            Vec::new()
        } else {
            let parent = &out[rng.gen_range(0..i)];
            let mut shared = parent.clone();
            shared.shuffle(rng);
            shared.truncate(rng.gen_range(0..=parent.len().min(2)));
            shared
        };
        let extra = rng.gen_range(if vars.is_empty() { 1 } else { 0 }..=2);
        vars.extend(fresh(extra, &mut next));
        vars.shuffle(rng);
        out.push(vars);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, vs)| Atom { relation: format!("R{i}"), args: vs.into_iter().map(Term::Var).collect() })
        .collect()
}

pub fn query(head: Vec<String>, atoms: Vec<Atom>) -> ConjunctiveQuery {
    ConjunctiveQuery::new("Q", head, atoms).expect("well-formed query")
}

/// Facts over the query's relations with values in `0..domain`.
pub fn random_db(rng: &mut impl Rng, q: &ConjunctiveQuery, facts_per_relation: usize, domain: i64) -> Database {
    let mut db = Database::new();
    for a in &q.atoms {
        db.declare(&a.relation, Some(a.args.len())).expect("consistent arity");
        for _ in 0..facts_per_relation {
            let vals = (0..a.args.len()).map(|_| Value::Int(rng.gen_range(0..domain))).collect();
            db.insert(&a.relation, vals).expect("consistent arity");
        }
    }
    db
}

/// Nested-loop join: every binding of the body, projected on the head.
pub fn nested_loop(q: &ConjunctiveQuery, db: &Database, keep: &dyn Fn(usize) -> bool) -> BTreeSet<Vec<Value>> {
    fn go(
        q: &ConjunctiveQuery,
        db: &Database,
        keep: &dyn Fn(usize) -> bool,
        i: usize,
        env: &mut BTreeMap<String, Value>,
        out: &mut BTreeSet<Vec<Value>>,
    ) {
        let Some(atom) = q.atoms.get(i) else {
            out.insert(q.head.iter().map(|h| env[h].clone()).collect());
            return;
        };
        for (id, f) in db.facts().iter().enumerate() {
            if f.relation != atom.relation || f.values.len() != atom.args.len() || !keep(id) {
                continue;
            }
            let mut bound = Vec::new();
            let ok = atom.args.iter().zip(&f.values).all(|(t, v)| match t {
                Term::Const(c) => c == v,
                Term::Var(x) => match env.get(x) {
                    Some(w) => w == v,
                    None => {
                        env.insert(x.clone(), v.clone());
                        bound.push(x.clone());
                        true
                    }
                },
            });
            if ok {
                go(q, db, keep, i + 1, env, out);
            }
            for x in bound {
                env.remove(&x);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(q, db, keep, 0, &mut BTreeMap::new(), &mut out);
    out
}

/// Exact probability that `holds` is true on a random subset of `n` items.
pub fn world_probability(probs: &[BigRational], holds: impl Fn(u64) -> bool) -> BigRational {
    let n = probs.len();
    assert!(n <= 20);
    let mut total = BigRational::zero();
    for mask in 0..1u64 << n {
        if holds(mask) {
            total += (0..n).fold(BigRational::one(), |acc, i| {
                acc * if mask >> i & 1 == 1 { probs[i].clone() } else { BigRational::one() - &probs[i] }
            });
        }
    }
    total
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n as u64).fold(BigInt::one(), |a, k| a * k)
}

/// A random hierarchical self-join-free body: variables form a forest and
/// each atom takes the path from a root to some node.
pub fn random_hierarchical_body(rng: &mut impl Rng, atoms: usize) -> Vec<Atom> {
    let nodes = rng.gen_range(1..=4);
    let parent: Vec<Option<usize>> =
        (0..nodes).map(|i| if i == 0 || rng.gen_bool(0.3) { None } else { Some(rng.gen_range(0..i)) }).collect();
    let path = |mut i: usize| {
        let mut p = vec![format!("v{i}")];
        while let Some(j) = parent[i] {
            p.push(format!("v{j}"));
            i = j;
        }
        p
    };
    (0..atoms)
        .map(|k| {
            let mut vars = path(rng.gen_range(0..nodes));
            vars.shuffle(rng);
            Atom { relation: format!("R{k}"), args: vars.into_iter().map(Term::Var).collect() }
        })
        .collect()
}

/// Whether the Boolean query holds on the facts selected by `mask`.
pub fn holds_on(q: &ConjunctiveQuery, db: &Database, mask: u64) -> bool {
    !nested_loop(&q.boolean(), db, &|i| mask >> i & 1 == 1).is_empty()
}
