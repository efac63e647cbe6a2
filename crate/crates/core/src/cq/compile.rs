use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use super::hypergraph::{is_free_connex, join_tree};
use super::{ConjunctiveQuery, CqError, Database, FactId, Term};
use crate::circuit::VarSet;
use crate::relational::{AttrId, Attribute, RelBuilder, RelCircuit, RelId, RelNode, Schema, UnionSemantics};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CqOptions {
    /// Reuse sub-circuits for residual queries seen before.
    pub cache: bool,
    /// Full semijoin reduction along a join tree before compiling.
    pub semijoin: bool,
}

impl Default for CqOptions {
    fn default() -> Self {
        CqOptions { cache: true, semijoin: true }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CqStats {
    pub decisions: u64,
    pub cache_hits: u64,
    pub component_splits: u64,
}

#[derive(Clone, Debug)]
pub struct CompiledCq {
    /// Attributes are the head variables, in head order; the attached
    /// attribute order is the free prefix of `order`.
    pub circuit: RelCircuit,
    /// The full variable order used, free variables first.
    pub order: Vec<String>,
    pub warnings: Vec<String>,
    pub stats: CqStats,
}

/// One query atom over its distinct variables, with matching facts
/// projected and sorted in variable-rank order.
pub(crate) struct PreparedAtom {
    /// Variable ids (ranks in the order), increasing.
    pub vars: Vec<usize>,
    /// Value ids, one row per distinct projection, sorted.
    pub rows: Vec<Vec<u32>>,
    /// For each row, the facts projecting onto it.
    pub facts: Vec<Vec<FactId>>,
}

/// Dense value ids whose numeric order is the value order.
pub(crate) struct ValueDict {
    pub values: Vec<Value>,
    ids: HashMap<Value, u32>,
}

impl ValueDict {
    fn new(values: BTreeSet<Value>) -> ValueDict {
        let values: Vec<Value> = values.into_iter().collect();
        let ids = values.iter().enumerate().map(|(i, v)| (v.clone(), i as u32)).collect();
        ValueDict { values, ids }
    }

    fn id(&self, v: &Value) -> Option<u32> {
        self.ids.get(v).copied()
    }
}

/// Validates relations and arities against the database.
pub(crate) fn check_against(q: &ConjunctiveQuery, db: &Database) -> Result<(), CqError> {
    for (rel, arity) in q.arities()? {
        if !db.has_relation(rel) {
            return Err(CqError::UnknownRelation(rel.to_string()));
        }
        if matches!(db.arity(rel), Some(a) if a != arity) {
            return Err(CqError::ArityMismatch(rel.to_string()));
        }
    }
    Ok(())
}

/// Free variables first (keeping their relative order), then the rest.
fn normalize_order(q: &ConjunctiveQuery, order: &[String]) -> Result<Vec<String>, CqError> {
    let vars = q.vars();
    let missing: Vec<String> = vars.iter().filter(|v| !order.contains(v)).cloned().collect();
    if !missing.is_empty() {
        return Err(CqError::OrderMissingVariables(missing));
    }
    let mut seen = HashSet::new();
    let mut free = Vec::new();
    let mut exist = Vec::new();
    for v in order {
        if !vars.contains(v) || !seen.insert(v) {
            return Err(CqError::OrderUnknownVariable(v.clone()));
        }
        if q.head.contains(v) {
            free.push(v.clone());
        } else {
            exist.push(v.clone());
        }
    }
    free.extend(exist);
    Ok(free)
}

pub(crate) fn prepare(q: &ConjunctiveQuery, db: &Database, order: &[String]) -> (ValueDict, Vec<PreparedAtom>) {
    let mut values: BTreeSet<Value> = BTreeSet::new();
    for a in &q.atoms {
        for &f in db.relation(&a.relation) {
            values.extend(db.fact(f).values.iter().cloned());
        }
    }
    let dict = ValueDict::new(values);
    let rank = |v: &str| order.iter().position(|o| o == v).expect("order covers the query");
    let atoms = q
        .atoms
        .iter()
        .map(|a| {
            let mut vars: Vec<usize> = a.vars().into_iter().map(rank).collect();
            vars.sort_unstable();
            let mut rows: Vec<(Vec<u32>, FactId)> = Vec::new();
            'facts: for &f in db.relation(&a.relation) {
                let vals = &db.fact(f).values;
                let mut row = vec![u32::MAX; vars.len()];
                for (t, v) in a.args.iter().zip(vals) {
                    match t {
                        Term::Const(c) => {
                            if c != v {
                                continue 'facts;
                            }
                        }
                        Term::Var(x) => {
                            let slot = vars.binary_search(&rank(x)).expect("atom variable");
                            let id = dict.id(v).expect("value in dictionary");
                            if row[slot] != u32::MAX && row[slot] != id {
                                continue 'facts;
                            }
                            row[slot] = id;
                        }
                    }
                }
                rows.push((row, f));
            }
            rows.sort();
            let mut out = PreparedAtom { vars, rows: Vec::new(), facts: Vec::new() };
            for (row, f) in rows {
                if out.rows.last() == Some(&row) {
                    out.facts.last_mut().expect("row").push(f);
                } else {
                    out.rows.push(row);
                    out.facts.push(vec![f]);
                }
            }
            out
        })
        .collect();
    (dict, atoms)
}

/// Yannakakis full reducer: removes rows that join with no row of a
/// neighbouring atom, bottom-up then top-down along the join tree.
pub(crate) fn semijoin_reduce(q: &ConjunctiveQuery, atoms: &mut [PreparedAtom]) {
    let Some(tree) = join_tree(q) else { return };
    let reduce = |atoms: &mut [PreparedAtom], keep: usize, by: usize| {
        let shared: Vec<usize> = atoms[keep].vars.iter().copied().filter(|v| atoms[by].vars.contains(v)).collect();
        let key = |a: &PreparedAtom, row: &[u32]| -> Vec<u32> {
            shared.iter().map(|v| row[a.vars.binary_search(v).expect("shared")]).collect()
        };
        let present: HashSet<Vec<u32>> = atoms[by].rows.iter().map(|r| key(&atoms[by], r)).collect();
        let a = &atoms[keep];
        let keep_mask: Vec<bool> = a.rows.iter().map(|r| present.contains(&key(a, r))).collect();
        let a = &mut atoms[keep];
        let mut it = keep_mask.iter();
        a.rows.retain(|_| *it.next().expect("mask"));
        let mut it = keep_mask.iter();
        a.facts.retain(|_| *it.next().expect("mask"));
    };
    let up = tree.bottom_up();
    for &i in &up {
        if let Some(p) = tree.parent[i] {
            reduce(atoms, p, i);
        }
    }
    for &i in up.iter().rev() {
        if let Some(p) = tree.parent[i] {
            reduce(atoms, i, p);
        }
    }
}

/// `(atom, decided prefix length, lo, hi)`: the atom's rows agreeing with
/// the decisions so far form the range `lo..hi`.
type Slot = (u32, u32, u32, u32);

struct Compiler<'a> {
    atoms: &'a [PreparedAtom],
    n_free: usize,
    /// Per free variable rank: its head position.
    attr_of: Vec<u32>,
    /// Per free variable rank: value id → domain index.
    domain_index: Vec<HashMap<u32, u32>>,
    b: RelBuilder,
    cache: HashMap<Vec<Slot>, RelId>,
    opts: CqOptions,
    stats: CqStats,
}

impl Compiler<'_> {
    fn next_var(&self, s: &Slot) -> usize {
        self.atoms[s.0 as usize].vars[s.1 as usize]
    }

    /// Groups slots into components connected by undecided variables.
    fn components(&self, slots: Vec<Slot>) -> Vec<Vec<Slot>> {
        let mut groups: Vec<(BTreeSet<usize>, Vec<Slot>)> = Vec::new();
        for s in slots {
            let vars: BTreeSet<usize> = self.atoms[s.0 as usize].vars[s.1 as usize..].iter().copied().collect();
            let (touching, rest): (Vec<_>, Vec<_>) = groups.into_iter().partition(|g| !g.0.is_disjoint(&vars));
            let mut merged = (vars, vec![s]);
            for (vs, ss) in touching {
                merged.0.extend(vs);
                merged.1.extend(ss);
            }
            groups = rest;
            groups.push(merged);
        }
        groups
            .into_iter()
            .map(|(_, mut ss)| {
                ss.sort_unstable();
                ss
            })
            .collect()
    }

    fn compile(&mut self, slots: Vec<Slot>) -> RelId {
        let comps = self.components(slots);
        if comps.len() > 1 {
            self.stats.component_splits += 1;
        }
        let mut kids = Vec::with_capacity(comps.len());
        for c in comps {
            let k = self.compile_component(c);
            if *self.b.node(k) == RelNode::Empty {
                return k;
            }
            kids.push(k);
        }
        self.b.join(kids)
    }

    fn compile_component(&mut self, slots: Vec<Slot>) -> RelId {
        if slots.is_empty() {
            return self.b.unit();
        }
        if self.opts.cache {
            if let Some(&id) = self.cache.get(&slots) {
                self.stats.cache_hits += 1;
                return id;
            }
        }
        let id = self.decide(&slots);
        if self.opts.cache {
            self.cache.insert(slots, id);
        }
        id
    }

    /// Branches on the earliest undecided variable over the values every
    /// atom containing it still allows.
    fn decide(&mut self, slots: &[Slot]) -> RelId {
        self.stats.decisions += 1;
        let x = slots.iter().map(|s| self.next_var(s)).min().expect("non-empty");
        let holders: Vec<usize> = (0..slots.len()).filter(|&i| self.next_var(&slots[i]) == x).collect();
        let lead = *holders.iter().min_by_key(|&&i| slots[i].3 - slots[i].2).expect("a holder");
        let free = x < self.n_free;
        let mut branches = Vec::new();
        let (la, lp, mut i, hi) = slots[lead];
        let lead_rows = &self.atoms[la as usize].rows;
        while i < hi {
            let d = lead_rows[i as usize][lp as usize];
            let run_end = i + lead_rows[i as usize..hi as usize].partition_point(|r| r[lp as usize] <= d) as u32;
            let mut next: Vec<Slot> = Vec::with_capacity(slots.len());
            let mut ok = true;
            for (k, s) in slots.iter().enumerate() {
                let (a, p, lo, h) = *s;
                let (lo2, h2) = if k == lead {
                    (i, run_end)
                } else if holders.contains(&k) {
                    let rows = &self.atoms[a as usize].rows[lo as usize..h as usize];
                    let s0 = rows.partition_point(|r| r[p as usize] < d) as u32;
                    let s1 = rows.partition_point(|r| r[p as usize] <= d) as u32;
                    if s0 == s1 {
                        ok = false;
                        break;
                    }
                    (lo + s0, lo + s1)
                } else {
                    next.push(*s);
                    continue;
                };
                if (p as usize) + 1 < self.atoms[a as usize].vars.len() {
                    next.push((a, p + 1, lo2, h2));
                }
            }
            i = run_end;
            if !ok {
                continue;
            }
            let rest = self.compile(next);
            if *self.b.node(rest) == RelNode::Empty {
                continue;
            }
            if !free {
                return self.b.unit();
            }
            let atom = self.b.atom(AttrId(self.attr_of[x]), self.domain_index[x][&d]);
            branches.push(self.b.join(vec![atom, rest]));
        }
        if free {
            self.b.union(branches)
        } else {
            self.b.empty()
        }
    }
}

/// Compiles `Q(db)` into an ordered decision circuit following `order`.
pub fn compile_cq(q: &ConjunctiveQuery, db: &Database, order: &[String]) -> Result<CompiledCq, CqError> {
    compile_cq_with(q, db, order, CqOptions::default())
}

pub fn compile_cq_with(
    q: &ConjunctiveQuery,
    db: &Database,
    order: &[String],
    opts: CqOptions,
) -> Result<CompiledCq, CqError> {
    check_against(q, db)?;
    let order = normalize_order(q, order)?;
    let mut warnings = Vec::new();
    if !is_free_connex(q) {
        warnings.push("query is not free-connex acyclic; circuit size may not be linear in the database".into());
    }
    let (dict, mut atoms) = prepare(q, db, &order);
    if opts.semijoin {
        semijoin_reduce(q, &mut atoms);
    }
    let n_free = q.head.len();

    // Attribute i is head variable i; its domain is the values it can take.
    let mut domain_ids: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n_free];
    for a in &atoms {
        for (slot, &v) in a.vars.iter().enumerate() {
            if v < n_free {
                domain_ids[v].extend(a.rows.iter().map(|r| r[slot]));
            }
        }
    }
    let head_rank: Vec<usize> = q.head.iter().map(|h| order.iter().position(|o| o == h).expect("free")).collect();
    let mut attrs = Vec::with_capacity(n_free);
    let mut domain_index: Vec<HashMap<u32, u32>> = vec![HashMap::new(); n_free];
    for (i, h) in q.head.iter().enumerate() {
        let ids = &domain_ids[head_rank[i]];
        let mut domain: Vec<Value> = ids.iter().map(|&d| dict.values[d as usize].clone()).collect();
        if domain.is_empty() {
            // No answers; a placeholder keeps the schema well formed.
            domain.push(Value::Int(0));
        }
        domain_index[head_rank[i]] = ids.iter().enumerate().map(|(k, &d)| (d, k as u32)).collect();
        attrs.push(Attribute { name: h.clone(), domain });
    }
    let schema = Arc::new(Schema::new(attrs).map_err(CqError::Rel)?);

    let mut c = Compiler {
        atoms: &atoms,
        n_free,
        attr_of: (0..n_free).map(|r| head_rank.iter().position(|&h| h == r).expect("free") as u32).collect(),
        domain_index,
        b: RelBuilder::new(),
        cache: HashMap::new(),
        opts,
        stats: CqStats::default(),
    };
    let mut slots = Vec::new();
    let mut empty = false;
    for (i, a) in atoms.iter().enumerate() {
        if a.rows.is_empty() {
            empty = true;
        } else if !a.vars.is_empty() {
            slots.push((i as u32, 0, 0, a.rows.len() as u32));
        }
    }
    let root = if empty { c.b.empty() } else { c.compile(slots) };
    let stats = c.stats;
    let circuit = c.b.finish(root, schema, VarSet::range(n_free), UnionSemantics::FullDomain).map_err(CqError::Rel)?;
    let free_order: Vec<AttrId> =
        order[..n_free].iter().map(|v| AttrId(q.head.iter().position(|h| h == v).expect("free") as u32)).collect();
    let circuit = circuit.with_order(free_order).map_err(CqError::Rel)?;
    Ok(CompiledCq { circuit, order, warnings, stats })
}
