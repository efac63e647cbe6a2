use std::collections::BTreeSet;

use super::{fact_names, fact_universe, fact_var, ProvError};
use crate::circuit::{Circuit, CircuitBuilder, DnfFormula, Lit, NodeId};
use crate::cq::{compile_cq, default_order, Answers, Atom, ConjunctiveQuery, Database, FactId, Term, Ucq};
use crate::relational::RelNode;
use crate::value::Value;

/// A query and database with one identifier column added per relation:
/// atom `R(t)` becomes `R*(t, y)` with a fresh variable `y`, and fact `F`
/// becomes `R*(values, #F)`.
#[derive(Clone, Debug)]
pub struct Lifted {
    pub query: ConjunctiveQuery,
    pub db: Database,
    /// The identifier variable of each atom.
    pub id_vars: Vec<String>,
}

fn lifted_name(relation: &str) -> String {
    format!("{relation}*")
}

pub fn lift(q: &ConjunctiveQuery, db: &Database) -> Lifted {
    let vars = q.vars();
    let mut prefix = "y".to_string();
    while vars.iter().any(|v| v.strip_prefix(prefix.as_str()).is_some_and(|r| r.parse::<usize>().is_ok())) {
        prefix.insert(0, '_');
    }
    let id_vars: Vec<String> = (0..q.atoms.len()).map(|i| format!("{prefix}{i}")).collect();
    let atoms = q
        .atoms
        .iter()
        .zip(&id_vars)
        .map(|(a, y)| {
            let mut args = a.args.clone();
            args.push(Term::Var(y.clone()));
            Atom { relation: lifted_name(&a.relation), args }
        })
        .collect();
    let query =
        ConjunctiveQuery::new(q.name.clone(), q.head.clone(), atoms).expect("lifting keeps the query well formed");
    let mut out = Database::new();
    for name in db.relation_names() {
        out.declare(&lifted_name(name), db.arity(name).map(|a| a + 1)).expect("fresh relation");
    }
    for (i, f) in db.facts().iter().enumerate() {
        let mut values = f.values.clone();
        values.push(Value::Fact(i as u32));
        let id = out.insert(&lifted_name(&f.relation), values).expect("arity follows the original");
        debug_assert_eq!(id, FactId(i as u32));
    }
    Lifted { query, db: out, id_vars }
}

/// Provenance of a self-join-free query as a DNNF over the fact variables,
/// obtained by compiling the lifted query with every variable free and
/// projecting the original variables away.
pub fn provenance_circuit_sjf(q: &ConjunctiveQuery, db: &Database) -> Result<Circuit, ProvError> {
    if !q.is_self_join_free() {
        return Err(ProvError::SelfJoinPresent);
    }
    let lifted = lift(&q.boolean(), db);
    let all = lifted.query.with_all_vars_free();
    let compiled = compile_cq(&all, &lifted.db, &default_order(&all))?;
    let rc = &compiled.circuit;
    let is_id: Vec<bool> = all.head.iter().map(|v| lifted.id_vars.contains(v)).collect();
    let mut b = CircuitBuilder::new();
    let mut map: Vec<NodeId> = Vec::with_capacity(rc.num_nodes());
    for n in rc.nodes() {
        let id = match n {
            RelNode::Atom { attr, value } if is_id[attr.index()] => match rc.schema().domain(*attr)[*value as usize] {
                Value::Fact(f) => b.lit(Lit::pos(fact_var(FactId(f)))),
                ref v => unreachable!("identifier column holds {v}"),
            },
            RelNode::Atom { .. } | RelNode::Unit => b.constant(true),
            RelNode::Empty => b.constant(false),
            RelNode::Union(cs) => b.or_simplified(cs.iter().map(|k| map[k.index()])),
            RelNode::Join(cs) => b.and_simplified(cs.iter().map(|k| map[k.index()])),
        };
        map.push(id);
    }
    let out = map[rc.output().index()];
    Ok(b.finish(out, fact_universe(db))?.with_names(fact_names(db)))
}

/// Monotone DNF with one term per set of facts some match of `q` uses.
pub fn provenance_dnf(q: &ConjunctiveQuery, db: &Database) -> Result<DnfFormula, ProvError> {
    let mut terms = BTreeSet::new();
    add_terms(q, db, &mut terms)?;
    Ok(to_dnf(terms))
}

pub fn provenance_dnf_ucq(u: &Ucq, db: &Database) -> Result<DnfFormula, ProvError> {
    let mut terms = BTreeSet::new();
    for q in &u.disjuncts {
        add_terms(q, db, &mut terms)?;
    }
    Ok(to_dnf(terms))
}

fn to_dnf(terms: BTreeSet<Vec<FactId>>) -> DnfFormula {
    DnfFormula::new(terms.into_iter().map(|t| t.into_iter().map(|f| Lit::pos(fact_var(f))).collect()))
        .expect("monotone terms")
}

fn add_terms(q: &ConjunctiveQuery, db: &Database, terms: &mut BTreeSet<Vec<FactId>>) -> Result<(), ProvError> {
    let all = q.with_all_vars_free();
    let answers = Answers::new(&all, db)?;
    let vars = &all.head;
    answers.enumerate(|row| {
        let mut t: Vec<FactId> = all
            .atoms
            .iter()
            .map(|a| {
                let values = a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Const(c) => c.clone(),
                        Term::Var(x) => row[vars.iter().position(|v| v == x).expect("free")].clone(),
                    })
                    .collect();
                db.find(&crate::cq::Fact { relation: a.relation.clone(), values }).expect("answers come from facts")
            })
            .collect();
        t.sort_unstable();
        t.dedup();
        terms.insert(t);
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{classify, Var};
    use crate::cq::{is_acyclic, parse_cq};

    fn example() -> (ConjunctiveQuery, Database) {
        (parse_cq("Q() :- R(x), S(y).").unwrap(), Database::parse_tsv("R\ta\nR\ta'\nS\tb\n").unwrap())
    }

    #[test]
    fn lifting_shape() {
        let (q, db) = example();
        let l = lift(&q, &db);
        assert_eq!(l.query.to_string(), "Q() :- R*(x, y0), S*(y, y1).");
        assert_eq!(l.db.fact(FactId(0)).values, vec![Value::from("a"), Value::Fact(0)]);
        assert_eq!(is_acyclic(&l.query), is_acyclic(&q));
    }

    #[test]
    fn example_circuit() {
        let (q, db) = example();
        let c = provenance_circuit_sjf(&q, &db).unwrap();
        assert!(classify(&c, None).is_dnnf());
        for m in 0..8u32 {
            let x = |i: u32| m >> i & 1 == 1;
            assert_eq!(c.eval_with(|v: Var| x(v.0)), (x(0) || x(1)) && x(2), "mask {m}");
        }
        let d = provenance_dnf(&q, &db).unwrap();
        assert_eq!(d.terms().len(), 2);
        assert_eq!(c.var_name(Var(1)), "R(a')");
    }

    #[test]
    fn empty_database_is_false() {
        let mut db = Database::new();
        db.declare("R", Some(1)).unwrap();
        db.declare("S", Some(1)).unwrap();
        let (q, _) = example();
        let c = provenance_circuit_sjf(&q, &db).unwrap();
        assert!(!c.eval_with(|_| true));
        assert!(provenance_dnf(&q, &db).unwrap().terms().is_empty());
    }

    #[test]
    fn self_join_rejected() {
        let q = parse_cq("Q() :- R(x, y), R(y, x).").unwrap();
        let db = Database::parse_tsv("R\t1\t2\nR\t2\t1\nR\t3\t3\n").unwrap();
        assert_eq!(provenance_circuit_sjf(&q, &db).unwrap_err(), ProvError::SelfJoinPresent);
        let d = provenance_dnf(&q, &db).unwrap();
        assert_eq!(d.terms().len(), 2);
    }
}
