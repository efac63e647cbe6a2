use std::collections::HashMap;

use super::CnfFormula;
use crate::circuit::{Circuit, CircuitBuilder, Lit, Node, NodeId, Var};

/// Branching variable selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Heuristic {
    /// Smallest variable index still occurring.
    #[default]
    FirstUnassigned,
    /// Variable with the most occurrences in the residual clauses.
    MostOccurrences,
    /// Among the most frequent variables, the one whose removal leaves the
    /// smallest largest connected component.
    MinCutGreedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompileOptions {
    pub heuristic: Heuristic,
    pub cache: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { heuristic: Heuristic::default(), cache: true }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CompileStats {
    pub decision_count: u64,
    pub unit_propagations: u64,
    pub cache_hits: u64,
    pub component_splits: u64,
    pub peak_cache_entries: usize,
}

type Clauses = Vec<Vec<Lit>>;

pub fn compile_dpll(f: &CnfFormula, heuristic: Heuristic) -> (Circuit, CompileStats) {
    compile_dpll_with(f, CompileOptions { heuristic, cache: true })
}

/// Compiles a CNF into a decision-DNNF over variables `0..num_vars`.
///
/// Unit propagation, connected-component splitting and a cache keyed by
/// the sorted residual clause list are applied at every call.
pub fn compile_dpll_with(f: &CnfFormula, opts: CompileOptions) -> (Circuit, CompileStats) {
    let mut clauses: Clauses = Vec::with_capacity(f.clauses.len());
    for cl in &f.clauses {
        let mut cl = cl.clone();
        cl.sort();
        cl.dedup();
        if cl.windows(2).any(|w| w[0].var() == w[1].var()) {
            continue;
        }
        clauses.push(cl);
    }
    let mut c = Compiler { b: CircuitBuilder::new(), cache: HashMap::new(), stats: CompileStats::default(), opts };
    let root = c.compile(clauses);
    let circuit = c.b.finish(root, f.universe()).expect("literals come from the formula");
    (circuit, c.stats)
}

struct Compiler {
    b: CircuitBuilder,
    cache: HashMap<Clauses, NodeId>,
    stats: CompileStats,
    opts: CompileOptions,
}

/// Sets `l` true: drops satisfied clauses and removes `¬l`.
fn assign(clauses: &[Vec<Lit>], l: Lit) -> Clauses {
    let nl = l.negate();
    clauses.iter().filter(|cl| !cl.contains(&l)).map(|cl| cl.iter().copied().filter(|&x| x != nl).collect()).collect()
}

fn canonical(mut clauses: Clauses) -> Clauses {
    clauses.sort();
    clauses.dedup();
    clauses
}

/// Connected components of the variable-interaction graph, as clause groups.
fn components(clauses: &[Vec<Lit>], skip: Option<Var>) -> Vec<Clauses> {
    let mut parent: HashMap<Var, Var> = HashMap::new();
    fn find(p: &mut HashMap<Var, Var>, v: Var) -> Var {
        let mut r = v;
        while let Some(&q) = p.get(&r) {
            if q == r {
                break;
            }
            r = q;
        }
        let mut x = v;
        while x != r {
            let nx = p[&x];
            p.insert(x, r);
            x = nx;
        }
        r
    }
    for cl in clauses {
        let mut vs = cl.iter().map(|l| l.var()).filter(|v| Some(*v) != skip);
        let Some(first) = vs.next() else { continue };
        parent.entry(first).or_insert(first);
        let r0 = find(&mut parent, first);
        for v in vs {
            parent.entry(v).or_insert(v);
            let r = find(&mut parent, v);
            if r != r0 {
                let r0 = find(&mut parent, r0);
                parent.insert(r, r0);
            }
        }
    }
    let mut groups: Vec<Clauses> = Vec::new();
    let mut slot: HashMap<Var, usize> = HashMap::new();
    for cl in clauses {
        let Some(v) = cl.iter().map(|l| l.var()).find(|v| Some(*v) != skip) else { continue };
        let r = find(&mut parent, v);
        let i = *slot.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[i].push(cl.clone());
    }
    groups
}

impl Compiler {
    fn compile(&mut self, clauses: Clauses) -> NodeId {
        if clauses.is_empty() {
            return self.b.constant(true);
        }
        if clauses.iter().any(|cl| cl.is_empty()) {
            return self.b.constant(false);
        }
        let clauses = canonical(clauses);
        if self.opts.cache {
            if let Some(&id) = self.cache.get(&clauses) {
                self.stats.cache_hits += 1;
                return id;
            }
        }
        let id = self.compile_uncached(&clauses);
        if self.opts.cache {
            self.cache.insert(clauses, id);
            self.stats.peak_cache_entries = self.stats.peak_cache_entries.max(self.cache.len());
        }
        id
    }

    fn compile_uncached(&mut self, clauses: &Clauses) -> NodeId {
        if let Some(unit) = clauses.iter().find(|cl| cl.len() == 1).map(|cl| cl[0]) {
            // Recorded as a decision whose other branch is the constant false.
            self.stats.unit_propagations += 1;
            let rest = self.compile(assign(clauses, unit));
            let f = self.b.constant(false);
            if rest == f {
                return f;
            }
            let x = unit.var();
            let (low, high) = if unit.is_positive() { (f, rest) } else { (rest, f) };
            let nx = self.b.lit(Lit::neg(x));
            let px = self.b.lit(Lit::pos(x));
            let l = self.b.and(vec![nx, low]);
            let h = self.b.and(vec![px, high]);
            return self.b.or(vec![l, h]);
        }
        let comps = components(clauses, None);
        if comps.len() > 1 {
            self.stats.component_splits += 1;
            let kids: Vec<NodeId> = comps.into_iter().map(|g| self.compile(g)).collect();
            if kids.iter().any(|k| matches!(self.b.node(*k), Node::False)) {
                return self.b.constant(false);
            }
            return self.b.and_simplified(kids);
        }
        let x = self.pick(clauses);
        self.stats.decision_count += 1;
        let low = self.compile(assign(clauses, Lit::neg(x)));
        let high = self.compile(assign(clauses, Lit::pos(x)));
        self.b.decision(x, low, high)
    }

    fn occurrences(clauses: &Clauses) -> Vec<(Var, usize)> {
        let mut occ: HashMap<Var, usize> = HashMap::new();
        for l in clauses.iter().flatten() {
            *occ.entry(l.var()).or_default() += 1;
        }
        let mut v: Vec<(Var, usize)> = occ.into_iter().collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }

    fn pick(&self, clauses: &Clauses) -> Var {
        match self.opts.heuristic {
            Heuristic::FirstUnassigned => clauses.iter().flatten().map(|l| l.var()).min().expect("non-empty"),
            Heuristic::MostOccurrences => Self::occurrences(clauses)[0].0,
            Heuristic::MinCutGreedy => {
                let occ = Self::occurrences(clauses);
                occ.iter()
                    .take(8)
                    .map(|&(v, n)| {
                        let largest = components(clauses, Some(v))
                            .iter()
                            .map(|g| {
                                let mut vs: Vec<Var> = g.iter().flatten().map(|l| l.var()).collect();
                                vs.sort();
                                vs.dedup();
                                vs.len()
                            })
                            .max()
                            .unwrap_or(0);
                        (largest, std::cmp::Reverse(n), v)
                    })
                    .min()
                    .expect("non-empty")
                    .2
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{classify, smooth};
    use crate::cnf::{parse_dimacs, verify_equivalence, EquivalenceVerdict};
    use crate::queries::model_count;
    use num_bigint::BigUint;

    fn count(f: &CnfFormula, h: Heuristic) -> BigUint {
        let (c, _) = compile_dpll(f, h);
        let r = classify(&c, None);
        assert!(r.is_decomposable && r.all_or_decision);
        assert_eq!(verify_equivalence(f, &c, 16), EquivalenceVerdict::Equivalent);
        model_count(&smooth(&c).unwrap()).unwrap()
    }

    #[test]
    fn small_formulas() {
        let f = parse_dimacs("p cnf 2 2\n1 2 0\n-1 2 0\n").unwrap();
        assert_eq!(count(&f, Heuristic::FirstUnassigned), BigUint::from(2u8));
        let f = parse_dimacs("p cnf 1 2\n1 0\n-1 0\n").unwrap();
        let (c, _) = compile_dpll(&f, Heuristic::MostOccurrences);
        assert_eq!(c.as_constant(), Some(false));
    }

    #[test]
    fn disjoint_clauses_split() {
        let f = parse_dimacs("p cnf 4 2\n1 2 0\n3 4 0\n").unwrap();
        let (c, stats) = compile_dpll(&f, Heuristic::MinCutGreedy);
        assert!(matches!(c.node(c.output()), Node::And(_)));
        assert_eq!(stats.component_splits, 1);
        for h in [Heuristic::FirstUnassigned, Heuristic::MostOccurrences, Heuristic::MinCutGreedy] {
            assert_eq!(count(&f, h), BigUint::from(9u8));
        }
    }
}
