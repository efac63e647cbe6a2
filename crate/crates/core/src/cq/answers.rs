use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::compile::check_against;
use super::{compile_cq, default_order, is_free_connex, CompiledCq, ConjunctiveQuery, CqError, Database, FactId, Term};
use crate::relational::{count_rel, enumerate_rel, RelError, RelIndex};
use crate::value::Value;

/// Calls `f` for every homomorphism from the body into the facts accepted
/// by `keep`, with the values of `q.vars()` and the fact matched per atom.
pub(crate) fn for_each_match(
    q: &ConjunctiveQuery,
    db: &Database,
    keep: impl Fn(FactId) -> bool,
    mut f: impl FnMut(&[Value], &[FactId]),
) {
    let vars = q.vars();
    let var_id = |x: &str| vars.iter().position(|v| v == x).expect("query variable");
    // Greedy atom order: most already-bound variables first.
    let mut order: Vec<usize> = Vec::with_capacity(q.atoms.len());
    let mut bound = vec![false; vars.len()];
    while order.len() < q.atoms.len() {
        let next = (0..q.atoms.len())
            .filter(|i| !order.contains(i))
            .max_by_key(|&i| {
                let b = q.atoms[i].vars().iter().filter(|v| bound[var_id(v)]).count();
                (b, std::cmp::Reverse(q.atoms[i].vars().len()), std::cmp::Reverse(i))
            })
            .expect("remaining atom");
        for v in q.atoms[next].vars() {
            bound[var_id(v)] = true;
        }
        order.push(next);
    }
    // Per step: positions whose value is known on arrival, and an index on them.
    struct Step {
        atom: usize,
        key_pos: Vec<usize>,
        index: HashMap<Vec<Value>, Vec<FactId>>,
    }
    let mut bound = vec![false; vars.len()];
    let steps: Vec<Step> = order
        .iter()
        .map(|&ai| {
            let a = &q.atoms[ai];
            let key_pos: Vec<usize> = (0..a.args.len())
                .filter(|&p| match &a.args[p] {
                    Term::Const(_) => true,
                    Term::Var(x) => bound[var_id(x)],
                })
                .collect();
            let mut index: HashMap<Vec<Value>, Vec<FactId>> = HashMap::new();
            for &fid in db.relation(&a.relation) {
                if keep(fid) {
                    let vals = &db.fact(fid).values;
                    index.entry(key_pos.iter().map(|&p| vals[p].clone()).collect()).or_default().push(fid);
                }
            }
            for v in a.vars() {
                bound[var_id(v)] = true;
            }
            Step { atom: ai, key_pos, index }
        })
        .collect();

    #[allow(clippy::too_many_arguments)]
    fn go(
        q: &ConjunctiveQuery,
        db: &Database,
        steps: &[Step],
        var_id: &dyn Fn(&str) -> usize,
        k: usize,
        binding: &mut Vec<Option<Value>>,
        used: &mut Vec<FactId>,
        f: &mut dyn FnMut(&[Value], &[FactId]),
    ) {
        if k == steps.len() {
            let vals: Vec<Value> = binding.iter().map(|v| v.clone().expect("bound")).collect();
            let mut per_atom = vec![FactId(0); q.atoms.len()];
            for (s, &fid) in steps.iter().zip(used.iter()) {
                per_atom[s.atom] = fid;
            }
            f(&vals, &per_atom);
            return;
        }
        let s = &steps[k];
        let a = &q.atoms[s.atom];
        let key: Vec<Value> = s
            .key_pos
            .iter()
            .map(|&p| match &a.args[p] {
                Term::Const(c) => c.clone(),
                Term::Var(x) => binding[var_id(x)].clone().expect("bound"),
            })
            .collect();
        let Some(cands) = s.index.get(&key) else { return };
        for &fid in cands {
            let vals = &db.fact(fid).values;
            let mut newly = Vec::new();
            let mut ok = true;
            for (t, v) in a.args.iter().zip(vals) {
                if let Term::Var(x) = t {
                    let i = var_id(x);
                    match &binding[i] {
                        Some(b) if b != v => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            binding[i] = Some(v.clone());
                            newly.push(i);
                        }
                    }
                }
            }
            if ok {
                used.push(fid);
                go(q, db, steps, var_id, k + 1, binding, used, f);
                used.pop();
            }
            for i in newly {
                binding[i] = None;
            }
        }
    }
    let mut binding = vec![None; vars.len()];
    go(q, db, &steps, &var_id, 0, &mut binding, &mut Vec::new(), &mut f);
}

/// `Q(db)` by backtracking join over the facts accepted by `keep`; rows are
/// in head order.
pub fn naive_answers(q: &ConjunctiveQuery, db: &Database, keep: impl Fn(FactId) -> bool) -> BTreeSet<Vec<Value>> {
    let n = q.head.len();
    let mut out = BTreeSet::new();
    // q.vars() lists head variables first.
    for_each_match(q, db, keep, |vals, _| {
        out.insert(vals[..n].to_vec());
    });
    out
}

enum Inner {
    Compiled(CompiledCq),
    /// Rows in head order, sorted by the reported order.
    Materialized(Vec<Vec<Value>>),
}

/// Answers of a query on a database: compiled when the query is free-connex
/// acyclic, otherwise materialized by a join.
pub struct Answers {
    head: Vec<String>,
    order: Vec<String>,
    inner: Inner,
}

/// Repeated direct access over one set of answers.
pub struct Accessor<'a> {
    answers: &'a Answers,
    index: Option<RelIndex<'a>>,
}

impl Accessor<'_> {
    /// The `i`-th answer (1-based) in lexicographic order of [`Answers::order`].
    pub fn get(&self, i: &BigUint) -> Result<Vec<Value>, CqError> {
        match (&self.answers.inner, &self.index) {
            (Inner::Compiled(c), Some(ix)) => Ok(ix.access(i)?.decode(c.circuit.schema())),
            (Inner::Materialized(rows), _) => {
                let k = i
                    .to_usize()
                    .filter(|&k| k >= 1 && k <= rows.len())
                    .ok_or_else(|| RelError::OutOfRange { index: i.to_string(), count: rows.len().to_string() })?;
                Ok(rows[k - 1].clone())
            }
            _ => unreachable!("compiled answers always carry an index"),
        }
    }
}

impl Answers {
    pub fn new(q: &ConjunctiveQuery, db: &Database) -> Result<Answers, CqError> {
        check_against(q, db)?;
        let order = default_order(q);
        let free_order: Vec<String> = order[..q.head.len()].to_vec();
        if is_free_connex(q) {
            let c = compile_cq(q, db, &order)?;
            return Ok(Answers { head: q.head.clone(), order: free_order, inner: Inner::Compiled(c) });
        }
        let perm: Vec<usize> = free_order.iter().map(|v| q.head.iter().position(|h| h == v).expect("head")).collect();
        let mut rows: Vec<Vec<Value>> = naive_answers(q, db, |_| true).into_iter().collect();
        rows.sort_by_cached_key(|r| perm.iter().map(|&p| r[p].clone()).collect::<Vec<_>>());
        Ok(Answers { head: q.head.clone(), order: free_order, inner: Inner::Materialized(rows) })
    }

    pub fn head(&self) -> &[String] {
        &self.head
    }

    /// The free variables in the order used for direct access.
    pub fn order(&self) -> &[String] {
        &self.order
    }

    pub fn compiled(&self) -> Option<&CompiledCq> {
        match &self.inner {
            Inner::Compiled(c) => Some(c),
            Inner::Materialized(_) => None,
        }
    }

    pub fn count(&self) -> BigUint {
        match &self.inner {
            Inner::Compiled(c) => count_rel(&c.circuit).expect("compiled circuits are countable"),
            Inner::Materialized(rows) => BigUint::from(rows.len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.count().is_zero()
    }

    /// Emits each answer once, values in head order.
    pub fn enumerate(&self, mut emit: impl FnMut(&[Value])) {
        match &self.inner {
            Inner::Compiled(c) => {
                let schema = c.circuit.schema();
                enumerate_rel(&c.circuit, |t| emit(&t.decode(schema))).expect("compiled circuits enumerate");
            }
            Inner::Materialized(rows) => rows.iter().for_each(|r| emit(r)),
        }
    }

    pub fn accessor(&self) -> Result<Accessor<'_>, CqError> {
        let index = match &self.inner {
            Inner::Compiled(c) => Some(RelIndex::new(&c.circuit)?),
            Inner::Materialized(_) => None,
        };
        Ok(Accessor { answers: self, index })
    }

    pub fn access(&self, i: &BigUint) -> Result<Vec<Value>, CqError> {
        self.accessor()?.get(i)
    }
}

pub fn answer_count(q: &ConjunctiveQuery, db: &Database) -> Result<BigUint, CqError> {
    Ok(Answers::new(q, db)?.count())
}

pub fn answer_enum(q: &ConjunctiveQuery, db: &Database, emit: impl FnMut(&[Value])) -> Result<(), CqError> {
    Answers::new(q, db)?.enumerate(emit);
    Ok(())
}

pub fn answer_access(q: &ConjunctiveQuery, db: &Database, i: &BigUint) -> Result<Vec<Value>, CqError> {
    Answers::new(q, db)?.access(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::parse_cq;

    fn rs() -> Database {
        Database::parse_tsv("R\ta\tb\nR\ta\tc\nS\tb\n").unwrap()
    }

    #[test]
    fn wrappers() {
        let q = parse_cq("Q(x, y) :- R(x, y), S(y).").unwrap();
        assert_eq!(answer_count(&q, &rs()).unwrap(), BigUint::from(1u8));
        assert_eq!(answer_access(&q, &rs(), &BigUint::from(1u8)).unwrap(), vec![Value::from("a"), Value::from("b")]);
        assert!(answer_access(&q, &rs(), &BigUint::from(2u8)).is_err());
        let mut n = 0;
        answer_enum(&q, &rs(), |_| n += 1).unwrap();
        assert_eq!(n, 1);
    }

    #[test]
    fn boolean_enum() {
        let q = parse_cq("Q() :- R(x, y), S(y).").unwrap();
        let mut rows = Vec::new();
        answer_enum(&q, &rs(), |r| rows.push(r.to_vec())).unwrap();
        assert_eq!(rows, vec![Vec::<Value>::new()]);
        let q = parse_cq("Q() :- R(x, x).").unwrap();
        assert_eq!(answer_count(&q, &rs()).unwrap(), BigUint::zero());
    }

    #[test]
    fn materialized_fallback() {
        let db = Database::parse_tsv("R\t1\t2\nR\t1\t3\nS\t2\t9\nS\t3\t8\nS\t3\t9\n").unwrap();
        let q = parse_cq("Q(z, x) :- R(x, y), S(y, z).").unwrap();
        let a = Answers::new(&q, &db).unwrap();
        assert!(a.compiled().is_none());
        assert_eq!(a.count(), BigUint::from(2u8));
        assert_eq!(a.order(), ["z", "x"]);
        assert_eq!(a.access(&BigUint::from(1u8)).unwrap(), vec![Value::Int(8), Value::Int(1)]);
    }

    #[test]
    fn match_witnesses() {
        let db = rs();
        let q = parse_cq("Q() :- R(x, y), S(y).").unwrap();
        let mut ms = Vec::new();
        for_each_match(&q, &db, |_| true, |_, fs| ms.push(fs.to_vec()));
        assert_eq!(ms, vec![vec![FactId(0), FactId(2)]]);
        let none = naive_answers(&q, &db, |f| f != FactId(2));
        assert!(none.is_empty());
    }
}
