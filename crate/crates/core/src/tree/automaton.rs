use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{SigmaTree, TreeError};

/// The label of a node annotated with its membership bit, as used by
/// automata over `Σ × {0,1}`.
pub fn annotate(label: &str, bit: bool) -> String {
    format!("{label}:{}", bit as u8)
}

/// A bottom-up tree automaton. Transitions map to sets of states; the
/// automaton is deterministic when every set has at most one state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TreeAutomaton {
    states: Vec<String>,
    accepting: BTreeSet<u32>,
    leaf: BTreeMap<String, BTreeSet<u32>>,
    internal: BTreeMap<(u32, u32, String), BTreeSet<u32>>,
}

impl TreeAutomaton {
    pub fn new<S: Into<String>>(states: impl IntoIterator<Item = S>) -> Self {
        TreeAutomaton { states: states.into_iter().map(Into::into).collect(), ..Default::default() }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, q: u32) -> &str {
        &self.states[q as usize]
    }

    pub fn state(&self, name: &str) -> Result<u32, TreeError> {
        self.states
            .iter()
            .position(|s| s == name)
            .map(|i| i as u32)
            .ok_or_else(|| TreeError::UnknownState(name.to_string()))
    }

    pub fn is_accepting(&self, q: u32) -> bool {
        self.accepting.contains(&q)
    }

    pub fn accept(&mut self, q: &str) -> Result<&mut Self, TreeError> {
        let q = self.state(q)?;
        self.accepting.insert(q);
        Ok(self)
    }

    pub fn add_leaf(&mut self, label: &str, to: &str) -> Result<&mut Self, TreeError> {
        let to = self.state(to)?;
        self.leaf.entry(label.to_string()).or_default().insert(to);
        Ok(self)
    }

    pub fn add_internal(&mut self, left: &str, right: &str, label: &str, to: &str) -> Result<&mut Self, TreeError> {
        let key = (self.state(left)?, self.state(right)?, label.to_string());
        let to = self.state(to)?;
        self.internal.entry(key).or_default().insert(to);
        Ok(self)
    }

    pub fn is_deterministic(&self) -> bool {
        self.leaf.values().chain(self.internal.values()).all(|s| s.len() <= 1)
    }

    /// Labels mentioned by some transition.
    pub fn alphabet(&self) -> BTreeSet<&str> {
        self.leaf.keys().chain(self.internal.keys().map(|k| &k.2)).map(String::as_str).collect()
    }

    pub(crate) fn internal_targets(&self, l: u32, r: u32, label: &str) -> Option<&BTreeSet<u32>> {
        self.internal.get(&(l, r, label.to_string()))
    }

    /// Deterministic transition on a leaf.
    pub fn step_leaf(&self, label: &str) -> Result<u32, TreeError> {
        single(self.leaf.get(label), || format!("leaf label `{label}`"))
    }

    pub fn step_internal(&self, l: u32, r: u32, label: &str) -> Result<u32, TreeError> {
        single(self.internal_targets(l, r, label), || {
            format!("({}, {}, `{label}`)", self.state_name(l), self.state_name(r))
        })
    }

    pub(crate) fn leaf_map(&self) -> &BTreeMap<String, BTreeSet<u32>> {
        &self.leaf
    }

    pub(crate) fn internal_map(&self) -> &BTreeMap<(u32, u32, String), BTreeSet<u32>> {
        &self.internal
    }

    pub(crate) fn accepting_set(&self) -> &BTreeSet<u32> {
        &self.accepting
    }

    /// Whether the automaton accepts `t`. Deterministic automata must have a
    /// transition for every step; otherwise state sets are tracked and a
    /// missing transition leads nowhere.
    pub fn run(&self, t: &SigmaTree) -> Result<bool, TreeError> {
        if self.is_deterministic() {
            let mut st: Vec<u32> = Vec::with_capacity(t.len());
            for n in 0..t.len() {
                let q = match t.children(n) {
                    None => self.step_leaf(t.label(n))?,
                    Some((l, r)) => self.step_internal(st[l], st[r], t.label(n))?,
                };
                st.push(q);
            }
            return Ok(self.is_accepting(st[t.root()]));
        }
        let mut st: Vec<BTreeSet<u32>> = Vec::with_capacity(t.len());
        for n in 0..t.len() {
            let s = match t.children(n) {
                None => self.leaf.get(t.label(n)).cloned().unwrap_or_default(),
                Some((l, r)) => {
                    let mut s = BTreeSet::new();
                    for &a in &st[l] {
                        for &b in &st[r] {
                            if let Some(ts) = self.internal_targets(a, b, t.label(n)) {
                                s.extend(ts);
                            }
                        }
                    }
                    s
                }
            };
            st.push(s);
        }
        Ok(st[t.root()].iter().any(|&q| self.is_accepting(q)))
    }

    /// Subset construction over the alphabet of the transitions. The empty
    /// set becomes a rejecting sink, so the result is total.
    pub fn determinize(&self, cap: usize) -> Result<TreeAutomaton, TreeError> {
        if self.is_deterministic() {
            return Ok(self.clone());
        }
        let labels: Vec<String> = self.alphabet().into_iter().map(String::from).collect();
        let mut ids: HashMap<BTreeSet<u32>, u32> = HashMap::new();
        let mut sets: Vec<BTreeSet<u32>> = Vec::new();
        let intern = |s: BTreeSet<u32>, ids: &mut HashMap<BTreeSet<u32>, u32>, sets: &mut Vec<BTreeSet<u32>>| {
            if let Some(&i) = ids.get(&s) {
                return Ok(i);
            }
            if sets.len() >= cap {
                return Err(TreeError::TooManyStates(cap));
            }
            let i = sets.len() as u32;
            ids.insert(s.clone(), i);
            sets.push(s);
            Ok(i)
        };
        let mut leaf = BTreeMap::new();
        for l in &labels {
            let s = self.leaf.get(l).cloned().unwrap_or_default();
            leaf.insert(l.clone(), BTreeSet::from([intern(s, &mut ids, &mut sets)?]));
        }
        let mut internal = BTreeMap::new();
        // Saturate: every pair of known subsets under every label.
        let mut done = 0usize;
        while done < sets.len() {
            let n = sets.len();
            for a in 0..n as u32 {
                for b in 0..n as u32 {
                    if (a as usize) < done && (b as usize) < done {
                        continue;
                    }
                    for l in &labels {
                        let mut s = BTreeSet::new();
                        for &x in &sets[a as usize] {
                            for &y in &sets[b as usize] {
                                if let Some(ts) = self.internal_targets(x, y, l) {
                                    s.extend(ts);
                                }
                            }
                        }
                        let to = intern(s, &mut ids, &mut sets)?;
                        internal.insert((a, b, l.clone()), BTreeSet::from([to]));
                    }
                }
            }
            done = n;
        }
        let states = sets
            .iter()
            .map(|s| {
                let names: Vec<&str> = s.iter().map(|&q| self.state_name(q)).collect();
                format!("{{{}}}", names.join(","))
            })
            .collect();
        let accepting =
            (0..sets.len() as u32).filter(|&i| sets[i as usize].iter().any(|&q| self.is_accepting(q))).collect();
        Ok(TreeAutomaton { states, accepting, leaf, internal })
    }

    /// "Some node is labeled `target`", over `alphabet`.
    pub fn exists_label(target: &str, alphabet: &[&str]) -> TreeAutomaton {
        let mut a = TreeAutomaton::new(["no", "yes"]);
        a.accept("yes").expect("state");
        for &l in alphabet {
            let hit = if l == target { "yes" } else { "no" };
            a.add_leaf(l, hit).expect("state");
            for x in ["no", "yes"] {
                for y in ["no", "yes"] {
                    let to = if l == target || x == "yes" || y == "yes" { "yes" } else { "no" };
                    a.add_internal(x, y, l, to).expect("state");
                }
            }
        }
        a
    }

    /// Accepts every tree over `alphabet`.
    pub fn accept_all(alphabet: &[&str]) -> TreeAutomaton {
        let mut a = TreeAutomaton::new(["q"]);
        a.accept("q").expect("state");
        for &l in alphabet {
            a.add_leaf(l, "q").expect("state");
            a.add_internal("q", "q", l, "q").expect("state");
        }
        a
    }

    /// Over annotated labels: exactly one node has bit 1.
    pub fn singleton(alphabet: &[&str]) -> TreeAutomaton {
        let mut a = TreeAutomaton::new(["zero", "one", "many"]);
        a.accept("one").expect("state");
        let st = ["zero", "one", "many"];
        for &l in alphabet {
            for bit in [false, true] {
                let sym = annotate(l, bit);
                a.add_leaf(&sym, st[bit as usize]).expect("state");
                for (i, x) in st.iter().enumerate() {
                    for (j, y) in st.iter().enumerate() {
                        let to = st[(i + j + bit as usize).min(2)];
                        a.add_internal(x, y, &sym, to).expect("state");
                    }
                }
            }
        }
        a
    }

    /// Over annotated labels: the marked nodes are exactly those labeled `target`.
    pub fn marks_label(target: &str, alphabet: &[&str]) -> TreeAutomaton {
        let mut a = TreeAutomaton::new(["ok", "bad"]);
        a.accept("ok").expect("state");
        for &l in alphabet {
            for bit in [false, true] {
                let sym = annotate(l, bit);
                let good = (l == target) == bit;
                a.add_leaf(&sym, if good { "ok" } else { "bad" }).expect("state");
                for x in ["ok", "bad"] {
                    for y in ["ok", "bad"] {
                        let to = if good && x == "ok" && y == "ok" { "ok" } else { "bad" };
                        a.add_internal(x, y, &sym, to).expect("state");
                    }
                }
            }
        }
        a
    }
}

fn single(s: Option<&BTreeSet<u32>>, what: impl FnOnce() -> String) -> Result<u32, TreeError> {
    match s.map(|s| s.iter().copied().collect::<Vec<_>>()).as_deref() {
        Some([q]) => Ok(*q),
        Some([_, _, ..]) => Err(TreeError::NondeterministicAutomaton),
        _ => Err(TreeError::IncompleteTransition(what())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exists_label_runs() {
        let a = TreeAutomaton::exists_label("a", &["a", "e"]);
        let t = SigmaTree::complete(1, "a", "e");
        assert_eq!(t.len(), 3);
        assert!(a.run(&t).unwrap());
        assert!(!a.run(&t.world(|_| false)).unwrap());
        assert!(a.run(&t.world(|n| n == 1)).unwrap());
    }

    #[test]
    fn incomplete_transition() {
        let a = TreeAutomaton::exists_label("a", &["a"]);
        let t = SigmaTree::complete(1, "a", "e");
        assert!(matches!(a.run(&t.world(|_| false)), Err(TreeError::IncompleteTransition(_))));
    }

    #[test]
    fn determinization_preserves_language() {
        // Guess a leaf labeled `a`: nondeterministically carry a token up.
        let mut n = TreeAutomaton::new(["idle", "found"]);
        n.accept("found").unwrap();
        for l in ["a", "e"] {
            n.add_leaf(l, "idle").unwrap();
            n.add_internal("idle", "idle", l, "idle").unwrap();
            n.add_internal("found", "idle", l, "found").unwrap();
            n.add_internal("idle", "found", l, "found").unwrap();
            n.add_internal("found", "found", l, "found").unwrap();
        }
        n.add_leaf("a", "found").unwrap();
        assert!(!n.is_deterministic());
        let d = n.determinize(64).unwrap();
        assert!(d.is_deterministic());
        let t = SigmaTree::complete(2, "e", "e");
        for mask in 0..1u32 << t.len() {
            let w = {
                let mut w = t.clone();
                for i in 0..t.len() {
                    if mask >> i & 1 == 1 {
                        w.set_label(i, "a");
                    }
                }
                w
            };
            assert_eq!(n.run(&w).unwrap(), d.run(&w).unwrap());
        }
        assert_eq!(n.determinize(1), Err(TreeError::TooManyStates(1)));
    }
}
