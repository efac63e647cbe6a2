use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{fact_var, ProvError};
use crate::circuit::{Circuit, CircuitBuilder, NodeId, VarSet};
use crate::cq::{check_against, Atom, ConjunctiveQuery, Database, FactId, Term};
use crate::value::Value;

/// A formula in which every fact variable occurs at most once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReadOnce {
    True,
    False,
    Leaf(FactId),
    And(Vec<ReadOnce>),
    Or(Vec<ReadOnce>),
}

impl ReadOnce {
    /// Conjunction, flattening nested conjunctions and folding constants.
    pub fn and(parts: impl IntoIterator<Item = ReadOnce>) -> ReadOnce {
        let mut out = Vec::new();
        for p in parts {
            match p {
                ReadOnce::False => return ReadOnce::False,
                ReadOnce::True => {}
                ReadOnce::And(ps) => out.extend(ps),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => ReadOnce::True,
            1 => out.pop().expect("one part"),
            _ => ReadOnce::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = ReadOnce>) -> ReadOnce {
        let mut out = Vec::new();
        for p in parts {
            match p {
                ReadOnce::True => return ReadOnce::True,
                ReadOnce::False => {}
                ReadOnce::Or(ps) => out.extend(ps),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => ReadOnce::False,
            1 => out.pop().expect("one part"),
            _ => ReadOnce::Or(out),
        }
    }

    pub fn eval(&self, present: &impl Fn(FactId) -> bool) -> bool {
        match self {
            ReadOnce::True => true,
            ReadOnce::False => false,
            ReadOnce::Leaf(f) => present(*f),
            ReadOnce::And(ps) => ps.iter().all(|p| p.eval(present)),
            ReadOnce::Or(ps) => ps.iter().any(|p| p.eval(present)),
        }
    }

    /// Leaves in depth-first order.
    pub fn leaves(&self) -> Vec<FactId> {
        fn go(t: &ReadOnce, out: &mut Vec<FactId>) {
            match t {
                ReadOnce::Leaf(f) => out.push(*f),
                ReadOnce::And(ps) | ReadOnce::Or(ps) => ps.iter().for_each(|p| go(p, out)),
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn display<'a>(&'a self, db: &'a Database) -> impl fmt::Display + 'a {
        struct D<'a>(&'a ReadOnce, &'a Database);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let list = |f: &mut fmt::Formatter<'_>, tag: &str, ps: &[ReadOnce]| {
                    write!(f, "{tag}(")?;
                    for (i, p) in ps.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{}", D(p, self.1))?;
                    }
                    write!(f, ")")
                };
                match self.0 {
                    ReadOnce::True => write!(f, "true"),
                    ReadOnce::False => write!(f, "false"),
                    ReadOnce::Leaf(x) => write!(f, "{}", self.1.fact(*x)),
                    ReadOnce::And(ps) => list(f, "And", ps),
                    ReadOnce::Or(ps) => list(f, "Or", ps),
                }
            }
        }
        D(self, db)
    }
}

/// For every two existential variables, the sets of atoms containing them
/// are disjoint or one contains the other.
pub fn is_hierarchical(q: &ConjunctiveQuery) -> Result<bool, ProvError> {
    if !q.is_self_join_free() {
        return Err(ProvError::SelfJoinPresent);
    }
    let sets: Vec<BTreeSet<usize>> = q
        .existential_vars()
        .iter()
        .map(|x| (0..q.atoms.len()).filter(|&i| q.atoms[i].vars().contains(&x.as_str())).collect())
        .collect();
    Ok(sets
        .iter()
        .enumerate()
        .all(|(i, a)| sets[i + 1..].iter().all(|b| a.is_disjoint(b) || a.is_subset(b) || b.is_subset(a))))
}

type Binding = BTreeMap<String, Value>;

fn fact_matches(a: &Atom, values: &[Value], binding: &Binding) -> bool {
    let mut local: BTreeMap<&str, &Value> = BTreeMap::new();
    a.args.iter().zip(values).all(|(t, v)| match t {
        Term::Const(c) => c == v,
        Term::Var(x) => match binding.get(x) {
            Some(b) => b == v,
            None => *local.entry(x.as_str()).or_insert(v) == v,
        },
    })
}

struct Builder<'a> {
    q: &'a ConjunctiveQuery,
    db: &'a Database,
}

impl Builder<'_> {
    fn unbound<'b>(&'b self, i: usize, binding: &'b Binding) -> impl Iterator<Item = &'b str> + 'b {
        self.q.atoms[i].vars().into_iter().filter(move |x| !binding.contains_key(*x))
    }

    fn build(&self, atoms: &[usize], binding: &Binding) -> Result<ReadOnce, ProvError> {
        if atoms.is_empty() {
            return Ok(ReadOnce::True);
        }
        let comps = self.components(atoms, binding);
        if comps.len() > 1 {
            let mut parts = Vec::with_capacity(comps.len());
            for c in comps {
                let p = self.build(&c, binding)?;
                if p == ReadOnce::False {
                    return Ok(p);
                }
                parts.push(p);
            }
            return Ok(ReadOnce::and(parts));
        }
        if let [i] = atoms {
            let a = &self.q.atoms[*i];
            return Ok(ReadOnce::or(
                self.db
                    .relation(&a.relation)
                    .iter()
                    .filter(|&&f| fact_matches(a, &self.db.fact(f).values, binding))
                    .map(|&f| ReadOnce::Leaf(f)),
            ));
        }
        let first: Vec<&str> = self.unbound(atoms[0], binding).collect();
        let root = first
            .into_iter()
            .find(|x| atoms.iter().all(|&i| self.q.atoms[i].vars().contains(x)))
            .ok_or(ProvError::NotHierarchical)?;
        let a = &self.q.atoms[atoms[0]];
        let pos = a.args.iter().position(|t| matches!(t, Term::Var(v) if v == root)).expect("root occurs");
        let values: BTreeSet<&Value> = self
            .db
            .relation(&a.relation)
            .iter()
            .map(|&f| &self.db.fact(f).values)
            .filter(|vs| fact_matches(a, vs, binding))
            .map(|vs| &vs[pos])
            .collect();
        let mut parts = Vec::with_capacity(values.len());
        for d in values {
            let mut b = binding.clone();
            b.insert(root.to_string(), d.clone());
            parts.push(self.build(atoms, &b)?);
        }
        Ok(ReadOnce::or(parts))
    }

    /// Atoms grouped by shared unbound variables.
    fn components(&self, atoms: &[usize], binding: &Binding) -> Vec<Vec<usize>> {
        let mut groups: Vec<(BTreeSet<&str>, Vec<usize>)> = Vec::new();
        for &i in atoms {
            let vars: BTreeSet<&str> = self.unbound(i, binding).collect();
            let (touching, rest): (Vec<_>, Vec<_>) = groups.into_iter().partition(|g| !g.0.is_disjoint(&vars));
            let mut merged = (vars, vec![i]);
            for (vs, is) in touching {
                merged.0.extend(vs);
                merged.1.extend(is);
            }
            groups = rest;
            groups.push(merged);
        }
        groups
            .into_iter()
            .map(|(_, mut is)| {
                is.sort_unstable();
                is
            })
            .collect()
    }
}

/// Read-once provenance of the Boolean version of a hierarchical
/// self-join-free query.
pub fn provenance_read_once(q: &ConjunctiveQuery, db: &Database) -> Result<ReadOnce, ProvError> {
    let q = q.boolean();
    check_against(&q, db)?;
    if !is_hierarchical(&q)? {
        return Err(ProvError::NotHierarchical);
    }
    let atoms: Vec<usize> = (0..q.atoms.len()).collect();
    let t = Builder { q: &q, db }.build(&atoms, &Binding::new())?;
    let leaves = t.leaves();
    assert_eq!(leaves.iter().collect::<BTreeSet<_>>().len(), leaves.len(), "read-once");
    Ok(t)
}

/// OBDD over the leaves of `t`, testing them in depth-first order.
pub fn read_once_to_obdd(t: &ReadOnce) -> Circuit {
    let universe = t.leaves().into_iter().map(fact_var).collect();
    read_once_to_obdd_over(t, universe)
}

/// Same, over a universe containing the leaves.
pub fn read_once_to_obdd_over(t: &ReadOnce, universe: VarSet) -> Circuit {
    // Each leaf becomes one decision whose branches continue with the
    // rest of the formula on success and failure.
    fn go(b: &mut CircuitBuilder, t: &ReadOnce, on_true: NodeId, on_false: NodeId) -> NodeId {
        match t {
            ReadOnce::True => on_true,
            ReadOnce::False => on_false,
            ReadOnce::Leaf(f) => b.decision(fact_var(*f), on_false, on_true),
            ReadOnce::And(ps) => ps.iter().rev().fold(on_true, |acc, p| go(b, p, acc, on_false)),
            ReadOnce::Or(ps) => ps.iter().rev().fold(on_false, |acc, p| go(b, p, on_true, acc)),
        }
    }
    let mut b = CircuitBuilder::new();
    let yes = b.constant(true);
    let no = b.constant(false);
    let out = go(&mut b, t, yes, no);
    b.finish(out, universe).expect("leaves lie in the universe")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::classify;
    use crate::cq::parse_cq;
    use crate::queries::{model_count, prepare_for_counting};
    use num_bigint::BigUint;

    fn q(s: &str) -> ConjunctiveQuery {
        parse_cq(s).unwrap()
    }

    #[test]
    fn hierarchy() {
        assert!(is_hierarchical(&q("Q() :- R(x), S(x, y).")).unwrap());
        assert!(!is_hierarchical(&q("Q() :- R(x), S(x, y), T(y).")).unwrap());
        assert!(is_hierarchical(&q("Q() :- R(x), S(y).")).unwrap());
        assert_eq!(is_hierarchical(&q("Q() :- R(x), R(y).")), Err(ProvError::SelfJoinPresent));
    }

    #[test]
    fn example_formula() {
        let db = Database::parse_tsv("R\ta\nR\ta'\nS\tb\n").unwrap();
        let t = provenance_read_once(&q("Q() :- R(x), S(y)."), &db).unwrap();
        assert_eq!(t.display(&db).to_string(), "And(Or(R(a), R(a')), S(b))");
        let c = read_once_to_obdd(&t);
        let r = classify(&c, None);
        assert!(r.obdd_order.is_some());
        assert_eq!(r.obdd_order.unwrap().len(), 3);
        assert_eq!(model_count(&prepare_for_counting(&c).unwrap()).unwrap(), BigUint::from(3u8));
    }

    #[test]
    fn single_atom_and_leaf() {
        let db = Database::parse_tsv("R\t1\nR\t2\nR\t3\n").unwrap();
        let t = provenance_read_once(&q("Q() :- R(x)."), &db).unwrap();
        assert_eq!(
            t,
            ReadOnce::Or(vec![ReadOnce::Leaf(FactId(0)), ReadOnce::Leaf(FactId(1)), ReadOnce::Leaf(FactId(2))])
        );
        let c = read_once_to_obdd(&ReadOnce::Leaf(FactId(0)));
        assert_eq!(classify(&c, None).obdd_order.map(|o| o.len()), Some(1));
    }

    #[test]
    fn obdd_is_linear() {
        let l = |i| ReadOnce::Leaf(FactId(i));
        let t = ReadOnce::And(vec![ReadOnce::Or(vec![l(0), l(1)]), ReadOnce::Or(vec![l(2), l(3)])]);
        let c = read_once_to_obdd(&t);
        // One test per leaf, each at most five gates (two literals, two
        // branches, one choice), plus the two terminals.
        assert_eq!(classify(&c, None).obdd_order.map(|o| o.len()), Some(4));
        assert!(c.num_nodes() <= 5 * 4 + 2, "{}", c.num_nodes());
        for m in 0..16u32 {
            let present = |f: FactId| m >> f.0 & 1 == 1;
            assert_eq!(c.eval_with(|v| m >> v.0 & 1 == 1), t.eval(&present));
        }
    }

    #[test]
    fn stuck_recursion_is_reported() {
        let db = Database::parse_tsv("R\t1\nS\t1\t2\nT\t2\n").unwrap();
        assert_eq!(provenance_read_once(&q("Q() :- R(x), S(x, y), T(y)."), &db), Err(ProvError::NotHierarchical));
    }
}
