use std::collections::BTreeSet;

use super::{ConjunctiveQuery, CqError};

/// A join tree over the atoms of a query: `parent[i]` is the neighbour of
/// atom `i` towards the root, `None` for the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinTree {
    pub parent: Vec<Option<usize>>,
}

impl JoinTree {
    pub fn root(&self) -> Option<usize> {
        self.parent.iter().position(|p| p.is_none())
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.parent.len()).filter(|&j| self.parent[j] == Some(i)).collect()
    }

    /// Atoms with every child before its parent.
    pub fn bottom_up(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.parent.len());
        let mut stack: Vec<usize> = self.root().into_iter().collect();
        while let Some(i) = stack.pop() {
            order.push(i);
            stack.extend(self.children(i));
        }
        order.reverse();
        order
    }

    /// Every variable's atoms form a connected subtree.
    pub fn has_running_intersection(&self, edges: &[BTreeSet<String>]) -> bool {
        let vars: BTreeSet<&String> = edges.iter().flatten().collect();
        vars.into_iter().all(|v| {
            let holders: Vec<usize> = (0..edges.len()).filter(|&i| edges[i].contains(v)).collect();
            // Connected iff exactly one holder has a parent outside the set.
            holders.iter().filter(|&&i| !matches!(self.parent[i], Some(p) if edges[p].contains(v))).count() == 1
        })
    }
}

/// GYO reduction. Returns the join forest, linked into one tree, when the
/// hypergraph is acyclic.
pub(crate) fn gyo(edges: &[BTreeSet<String>]) -> Option<JoinTree> {
    let n = edges.len();
    let mut cur: Vec<BTreeSet<String>> = edges.to_vec();
    let mut alive = vec![true; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    loop {
        let mut changed = false;
        // Drop vertices that occur in a single live edge.
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            let lonely: Vec<String> = cur[i]
                .iter()
                .filter(|v| (0..n).all(|j| j == i || !alive[j] || !cur[j].contains(*v)))
                .cloned()
                .collect();
            for v in lonely {
                cur[i].remove(&v);
                changed = true;
            }
        }
        // Drop edges contained in another live edge.
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            if let Some(j) = (0..n).find(|&j| j != i && alive[j] && cur[i].is_subset(&cur[j])) {
                alive[i] = false;
                parent[i] = Some(j);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (alive.iter().filter(|&&a| a).count() <= 1).then_some(JoinTree { parent })
}

pub(crate) fn atom_edges(q: &ConjunctiveQuery) -> Vec<BTreeSet<String>> {
    q.atoms.iter().map(|a| a.vars().into_iter().map(String::from).collect()).collect()
}

pub fn is_acyclic(q: &ConjunctiveQuery) -> bool {
    gyo(&atom_edges(q)).is_some()
}

pub fn join_tree(q: &ConjunctiveQuery) -> Option<JoinTree> {
    let edges = atom_edges(q);
    let t = gyo(&edges)?;
    debug_assert!(t.has_running_intersection(&edges));
    Some(t)
}

/// Acyclic, and still acyclic with an extra atom over the head variables.
pub fn is_free_connex(q: &ConjunctiveQuery) -> bool {
    let mut edges = atom_edges(q);
    if gyo(&edges).is_none() {
        return false;
    }
    edges.push(q.head.iter().cloned().collect());
    gyo(&edges).is_some()
}

fn neighbours(q: &ConjunctiveQuery, vars: &[String]) -> Vec<Vec<bool>> {
    let pos = |v: &str| vars.iter().position(|x| x == v);
    let mut adj = vec![vec![false; vars.len()]; vars.len()];
    for a in &q.atoms {
        let ids: Vec<usize> = a.vars().into_iter().filter_map(pos).collect();
        for &i in &ids {
            for &j in &ids {
                adj[i][j] |= i != j;
            }
        }
    }
    adj
}

/// Whether some variable has two earlier neighbours that are not
/// neighbours of each other (a "disruptive trio" among `order`).
pub fn has_disruptive_trio(q: &ConjunctiveQuery, order: &[String]) -> bool {
    let adj = neighbours(q, order);
    (0..order.len()).any(|k| {
        let earlier: Vec<usize> = (0..k).filter(|&i| adj[k][i]).collect();
        earlier.iter().enumerate().any(|(a, &i)| earlier[a + 1..].iter().any(|&j| !adj[i][j]))
    })
}

/// Maximum cardinality search over `vars`, continuing from `visited`.
/// Ties go to the earliest variable in `vars`.
fn mcs(q: &ConjunctiveQuery, visited: &[String], vars: &[String]) -> Vec<String> {
    let all: Vec<String> = visited.iter().chain(vars).cloned().collect();
    let adj = neighbours(q, &all);
    let mut done: Vec<bool> = (0..all.len()).map(|i| i < visited.len()).collect();
    let mut out = Vec::with_capacity(vars.len());
    for _ in 0..vars.len() {
        let score = |i: usize| (0..all.len()).filter(|&j| done[j] && adj[i][j]).count();
        let best = (visited.len()..all.len())
            .filter(|&i| !done[i])
            .max_by_key(|&i| (score(i), std::cmp::Reverse(i)))
            .expect("remaining variable");
        done[best] = true;
        out.push(all[best].clone());
    }
    out
}

/// A variable order with the head variables first. The head order is kept
/// when it has no disruptive trio; otherwise a maximum cardinality search
/// picks one. Existential variables follow in search order.
pub fn default_order(q: &ConjunctiveQuery) -> Vec<String> {
    let free = if has_disruptive_trio(q, &q.head) { mcs(q, &[], &q.head) } else { q.head.clone() };
    let exist = mcs(q, &free, &q.existential_vars());
    free.into_iter().chain(exist).collect()
}

/// [`default_order`] for free-connex queries.
pub fn elimination_order(q: &ConjunctiveQuery) -> Result<Vec<String>, CqError> {
    if !is_free_connex(q) {
        return Err(CqError::NotFreeConnex);
    }
    Ok(default_order(q))
}
