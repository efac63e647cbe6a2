use num_bigint::BigUint;
use num_traits::Zero;

use super::count::gate_counts;
use super::{AttrId, RelCircuit, RelError, RelId, RelNode, Tuple};

/// Free attributes padded by a union or the root, cycled innermost.
struct Odometer {
    attrs: Vec<AttrId>,
    sizes: Vec<u32>,
    cur: Vec<u32>,
}

impl Odometer {
    fn new(c: &RelCircuit, attrs: Vec<AttrId>) -> Odometer {
        let (fixed, free): (Vec<AttrId>, Vec<AttrId>) = attrs.into_iter().partition(|&a| c.default_of(a).is_some());
        let mut cur: Vec<u32> = free.iter().map(|_| 0).collect();
        let mut sizes: Vec<u32> = free.iter().map(|&a| c.schema().domain_size(a) as u32).collect();
        let mut all = free;
        // Zero-suppressed padding is a single fixed value.
        for a in fixed {
            cur.push(c.default_of(a).expect("fixed"));
            sizes.push(0);
            all.push(a);
        }
        Odometer { attrs: all, sizes, cur }
    }

    fn advance(&mut self) -> bool {
        for i in (0..self.cur.len()).rev() {
            if self.sizes[i] == 0 {
                continue;
            }
            self.cur[i] += 1;
            if self.cur[i] < self.sizes[i] {
                return true;
            }
            self.cur[i] = 0;
        }
        false
    }

    fn write(&self, vals: &mut [u32]) {
        for (a, &d) in self.attrs.iter().zip(&self.cur) {
            vals[a.index()] = d;
        }
    }
}

enum Cur {
    Atom(AttrId, u32),
    Unit,
    Join(Vec<Cur>, RelId),
    Union { gate: RelId, pos: usize, kid: Box<Cur>, pad: Odometer },
}

struct Enumerator<'a> {
    c: &'a RelCircuit,
    /// Children of each union with a non-zero count.
    live: Vec<Vec<RelId>>,
}

impl Enumerator<'_> {
    fn first(&self, g: RelId) -> Cur {
        match self.c.node(g) {
            RelNode::Atom { attr, value } => Cur::Atom(*attr, *value),
            RelNode::Unit => Cur::Unit,
            RelNode::Empty => unreachable!("empty gates have count zero"),
            RelNode::Join(cs) => Cur::Join(cs.iter().map(|&k| self.first(k)).collect(), g),
            RelNode::Union(_) => self.union_at(g, 0),
        }
    }

    fn union_at(&self, gate: RelId, pos: usize) -> Cur {
        let k = self.live[gate.index()][pos];
        let pad = Odometer::new(self.c, self.c.padding(self.c.attrset(gate), self.c.attrset(k)));
        Cur::Union { gate, pos, kid: Box::new(self.first(k)), pad }
    }

    fn advance(&self, cur: &mut Cur) -> bool {
        match cur {
            Cur::Atom(..) | Cur::Unit => false,
            Cur::Join(kids, g) => {
                let cs = self.c.node(*g).children();
                for i in (0..kids.len()).rev() {
                    if self.advance(&mut kids[i]) {
                        return true;
                    }
                    kids[i] = self.first(cs[i]);
                }
                false
            }
            Cur::Union { gate, pos, kid, pad } => {
                if pad.advance() || self.advance(kid) {
                    return true;
                }
                if *pos + 1 < self.live[gate.index()].len() {
                    *cur = self.union_at(*gate, *pos + 1);
                    return true;
                }
                false
            }
        }
    }

    fn write(&self, cur: &Cur, vals: &mut [u32]) {
        match cur {
            Cur::Atom(a, d) => vals[a.index()] = *d,
            Cur::Unit => {}
            Cur::Join(kids, _) => kids.iter().for_each(|k| self.write(k, vals)),
            Cur::Union { kid, pad, .. } => {
                pad.write(vals);
                self.write(kid, vals);
            }
        }
    }
}

/// Emits every tuple of the relation exactly once, over the circuit's
/// attributes. Empty branches are skipped using precomputed counts, so each
/// step advances a cursor over the circuit without backtracking.
pub fn enumerate_rel(c: &RelCircuit, mut emit: impl FnMut(&Tuple)) -> Result<(), RelError> {
    let counts: Vec<BigUint> = gate_counts(c)?;
    let out = c.output();
    if counts[out.index()].is_zero() {
        return Ok(());
    }
    let live = c
        .nodes()
        .iter()
        .map(|n| match n {
            RelNode::Union(cs) => cs.iter().copied().filter(|k| !counts[k.index()].is_zero()).collect(),
            _ => Vec::new(),
        })
        .collect();
    let e = Enumerator { c, live };
    let attrs = c.universe_attrs();
    let mut root_pad = Odometer::new(c, c.padding(c.universe(), c.attrset(out)));
    let mut cur = e.first(out);
    let mut vals = vec![0u32; c.schema().len()];
    loop {
        e.write(&cur, &mut vals);
        root_pad.write(&mut vals);
        emit(&Tuple::from_pairs(attrs.iter().map(|&a| (a, vals[a.index()]))));
        if root_pad.advance() {
            continue;
        }
        if !e.advance(&mut cur) {
            return Ok(());
        }
    }
}

/// All tuples, in enumeration order.
pub fn tuples(c: &RelCircuit) -> Result<Vec<Tuple>, RelError> {
    let mut out = Vec::new();
    enumerate_rel(c, |t| out.push(t.clone()))?;
    Ok(out)
}
