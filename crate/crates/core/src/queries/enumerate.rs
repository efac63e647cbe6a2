use super::sat::sat_table;
use super::{require_dnnf, QueryError};
use crate::circuit::{smooth, Circuit, Lit, Node, NodeId, Valuation, Var};

/// Calls `emit` once per satisfying valuation.
pub fn enumerate(c: &Circuit, mut emit: impl FnMut(&Valuation)) -> Result<(), QueryError> {
    for nu in Models::new(c)? {
        emit(&nu);
    }
    Ok(())
}

/// Iterator over the satisfying valuations of a DNNF.
///
/// Deterministic circuits are smoothed and walked with a cursor tree, one
/// cursor per gate on the current branch, so the work between two outputs
/// depends on the circuit and not on how many outputs came before. Other
/// DNNFs fall back to a depth-first search over variables that prunes with
/// a linear-time satisfiability test.
pub struct Models {
    inner: Inner,
}

enum Inner {
    Cursor(CursorEnum),
    Flashlight(Flashlight),
}

impl Models {
    pub fn new(c: &Circuit) -> Result<Models, QueryError> {
        require_dnnf(c)?;
        let inner = if c.is_certified_deterministic() {
            let s = smooth(c).map_err(|_| QueryError::NotDnnf)?;
            Inner::Cursor(CursorEnum::new(s))
        } else {
            Inner::Flashlight(Flashlight::new(c.clone()))
        };
        Ok(Models { inner })
    }

    /// Whether the constant-delay cursor path is in use.
    pub fn is_fast_path(&self) -> bool {
        matches!(self.inner, Inner::Cursor(_))
    }
}

impl Iterator for Models {
    type Item = Valuation;
    fn next(&mut self) -> Option<Valuation> {
        match &mut self.inner {
            Inner::Cursor(e) => e.next(),
            Inner::Flashlight(e) => e.next(),
        }
    }
}

enum Cur {
    Leaf(Option<Lit>),
    And { gate: NodeId, kids: Vec<Cur> },
    Or { gate: NodeId, pos: usize, kid: Box<Cur> },
}

struct CursorEnum {
    c: Circuit,
    sat: Vec<bool>,
    vars: Vec<Var>,
    slot: Vec<usize>,
    free: Vec<usize>,
    free_bits: Vec<bool>,
    cur: Option<Cur>,
    started: bool,
    values: Vec<bool>,
}

impl CursorEnum {
    fn new(c: Circuit) -> Self {
        let sat = sat_table(&c);
        let vars = c.universe().to_vec();
        let mut slot = vec![usize::MAX; c.universe().bound()];
        for (i, v) in vars.iter().enumerate() {
            slot[v.index()] = i;
        }
        let root_vars = c.varset(c.output()).expect("valid");
        let free: Vec<usize> =
            vars.iter().enumerate().filter(|(_, v)| !root_vars.contains(**v)).map(|(i, _)| i).collect();
        let n = vars.len();
        CursorEnum {
            free_bits: vec![false; free.len()],
            c,
            sat,
            vars,
            slot,
            free,
            cur: None,
            started: false,
            values: vec![false; n],
        }
    }

    fn first(&self, g: NodeId) -> Cur {
        match self.c.node(g) {
            Node::Lit(l) => Cur::Leaf(Some(*l)),
            Node::And(cs) => Cur::And { gate: g, kids: cs.iter().map(|&ch| self.first(ch)).collect() },
            Node::Or(cs) => {
                let pos = cs.iter().position(|ch| self.sat[ch.index()]).expect("satisfiable gate");
                Cur::Or { gate: g, pos, kid: Box::new(self.first(cs[pos])) }
            }
            _ => Cur::Leaf(None),
        }
    }

    fn advance(&self, cur: &mut Cur) -> bool {
        match cur {
            Cur::Leaf(_) => false,
            Cur::And { gate, kids } => {
                let cs = self.c.node(*gate).children();
                for i in (0..kids.len()).rev() {
                    if self.advance(&mut kids[i]) {
                        for j in i + 1..kids.len() {
                            kids[j] = self.first(cs[j]);
                        }
                        return true;
                    }
                }
                false
            }
            Cur::Or { gate, pos, kid } => {
                if self.advance(kid) {
                    return true;
                }
                let cs = self.c.node(*gate).children();
                match (*pos + 1..cs.len()).find(|&p| self.sat[cs[p].index()]) {
                    Some(p) => {
                        *pos = p;
                        **kid = self.first(cs[p]);
                        true
                    }
                    None => false,
                }
            }
        }
    }

    fn write(&self, cur: &Cur, values: &mut [bool]) {
        match cur {
            Cur::Leaf(Some(l)) => values[self.slot[l.var().index()]] = l.is_positive(),
            Cur::Leaf(None) => {}
            Cur::And { kids, .. } => kids.iter().for_each(|k| self.write(k, values)),
            Cur::Or { kid, .. } => self.write(kid, values),
        }
    }

    fn next(&mut self) -> Option<Valuation> {
        if !self.started {
            self.started = true;
            if !self.sat[self.c.output().index()] {
                return None;
            }
            self.cur = Some(self.first(self.c.output()));
        } else {
            // Odometer over variables absent from the circuit first.
            let mut carried = true;
            for b in self.free_bits.iter_mut() {
                *b = !*b;
                if *b {
                    carried = false;
                    break;
                }
            }
            if carried {
                let mut cur = self.cur.take()?;
                if !self.advance(&mut cur) {
                    return None;
                }
                self.cur = Some(cur);
            }
        }
        let mut values = std::mem::take(&mut self.values);
        self.write(self.cur.as_ref().expect("live cursor"), &mut values);
        for (k, &i) in self.free.iter().enumerate() {
            values[i] = self.free_bits[k];
        }
        let nu = Valuation::from_values(&self.vars, &values);
        self.values = values;
        Some(nu)
    }
}

struct Flashlight {
    c: Circuit,
    vars: Vec<Var>,
    /// Per-variable assignment: `None` while undecided.
    assign: Vec<Option<bool>>,
    path: Vec<bool>,
    started: bool,
    done: bool,
}

impl Flashlight {
    fn new(c: Circuit) -> Self {
        let vars = c.universe().to_vec();
        let bound = c.universe().bound();
        Flashlight { c, vars, assign: vec![None; bound], path: Vec::new(), started: false, done: false }
    }

    fn sat(&self) -> bool {
        let mut s: Vec<bool> = Vec::with_capacity(self.c.num_nodes());
        for n in self.c.nodes() {
            let v = match n {
                Node::True => true,
                Node::False => false,
                Node::Lit(l) => self.assign[l.var().index()].is_none_or(|b| l.eval(b)),
                Node::And(cs) => cs.iter().all(|ch| s[ch.index()]),
                Node::Or(cs) => cs.iter().any(|ch| s[ch.index()]),
                Node::Not(_) => unreachable!("NNF checked"),
            };
            s.push(v);
        }
        s[self.c.output().index()]
    }

    fn set(&mut self, depth: usize, b: Option<bool>) {
        self.assign[self.vars[depth].index()] = b;
    }

    /// Extends the current (satisfiable) prefix to a full valuation, preferring 0.
    fn descend(&mut self) {
        while self.path.len() < self.vars.len() {
            let d = self.path.len();
            self.set(d, Some(false));
            if self.sat() {
                self.path.push(false);
            } else {
                self.set(d, Some(true));
                self.path.push(true);
            }
        }
    }

    fn next(&mut self) -> Option<Valuation> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if !self.sat() {
                self.done = true;
                return None;
            }
        } else {
            loop {
                let Some(last) = self.path.pop() else {
                    self.done = true;
                    return None;
                };
                let d = self.path.len();
                if last {
                    self.set(d, None);
                    continue;
                }
                self.set(d, Some(true));
                if self.sat() {
                    self.path.push(true);
                    break;
                }
                self.set(d, None);
            }
        }
        self.descend();
        Some(Valuation::from_values(&self.vars, &self.path))
    }
}
