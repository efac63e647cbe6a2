//! The c2d `.nnf` text format.
//!
//! ```text
//! nnf V E N
//! L -1
//! A 2 0 1
//! O 3 2 2 3
//! ```
//! `V` nodes, `E` edges, `N` variables; ids are 0-based in file order and
//! the last node is the output. `A 0` is true and `O 0 0` is false.

use std::fmt::Write as _;

use super::{Circuit, CircuitBuilder, CircuitError, Lit, Node, NodeId, VarSet};

pub fn write_nnf(c: &Circuit) -> Result<String, CircuitError> {
    let mut body = String::new();
    let mut edges = 0usize;
    for (i, n) in c.nodes().iter().enumerate() {
        match n {
            Node::True => body.push_str("A 0\n"),
            Node::False => body.push_str("O 0 0\n"),
            Node::Lit(l) => writeln!(body, "L {}", l.to_dimacs()).unwrap(),
            Node::And(cs) => {
                edges += cs.len();
                write!(body, "A {}", cs.len()).unwrap();
                for ch in cs.iter() {
                    write!(body, " {}", ch.0).unwrap();
                }
                body.push('\n');
            }
            Node::Or(cs) => {
                edges += cs.len();
                let j = c.decision_var(NodeId(i as u32)).map_or(0, |v| v.0 + 1);
                write!(body, "O {j} {}", cs.len()).unwrap();
                for ch in cs.iter() {
                    write!(body, " {}", ch.0).unwrap();
                }
                body.push('\n');
            }
            Node::Not(_) => return Err(CircuitError::NotNnf),
        }
    }
    Ok(format!("nnf {} {} {}\n{body}", c.num_nodes(), edges, c.universe().bound()))
}

pub fn read_nnf(text: &str) -> Result<Circuit, CircuitError> {
    let err = |line: usize, msg: &str| CircuitError::Format { line, msg: msg.to_string() };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with("c ") && *l != "c");
    let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let nums: Option<Vec<usize>> = h.get(1..).and_then(|r| r.iter().map(|x| x.parse().ok()).collect());
    let (v, e, n) = match (h.first(), nums.as_deref()) {
        (Some(&"nnf"), Some(&[v, e, n])) => (v, e, n),
        _ => return Err(err(hl, "expected header `nnf V E N`")),
    };
    let mut b = CircuitBuilder::new();
    let mut ids: Vec<NodeId> = Vec::with_capacity(v);
    let mut edges = 0usize;
    for (ln, line) in lines {
        if ids.len() == v {
            return Err(err(ln, "more nodes than declared"));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let ints: Result<Vec<i64>, _> = toks[1..].iter().map(|t| t.parse::<i64>()).collect();
        let ints = ints.map_err(|_| err(ln, "expected integers"))?;
        let child = |x: i64| -> Result<NodeId, CircuitError> {
            usize::try_from(x)
                .ok()
                .and_then(|x| ids.get(x).copied())
                .ok_or_else(|| err(ln, "child id does not refer to an earlier node"))
        };
        let id = match (toks[0], ints.as_slice()) {
            ("L", &[l]) => {
                let lit = Lit::from_dimacs(l).ok_or_else(|| err(ln, "literal 0"))?;
                if lit.var().index() >= n {
                    return Err(err(ln, "literal exceeds declared variable count"));
                }
                b.lit(lit)
            }
            ("A", [c, rest @ ..]) if *c >= 0 && rest.len() == *c as usize => {
                edges += rest.len();
                if rest.is_empty() {
                    b.constant(true)
                } else {
                    let cs = rest.iter().map(|&x| child(x)).collect::<Result<Vec<_>, _>>()?;
                    b.and(cs)
                }
            }
            ("O", [_j, c, rest @ ..]) if *c >= 0 && rest.len() == *c as usize => {
                edges += rest.len();
                if rest.is_empty() {
                    b.constant(false)
                } else {
                    let cs = rest.iter().map(|&x| child(x)).collect::<Result<Vec<_>, _>>()?;
                    b.or(cs)
                }
            }
            _ => return Err(err(ln, "malformed node line")),
        };
        ids.push(id);
    }
    if ids.len() != v {
        return Err(err(hl, "fewer nodes than declared"));
    }
    if edges != e {
        return Err(err(hl, "edge count does not match header"));
    }
    let out = *ids.last().ok_or_else(|| err(hl, "empty circuit"))?;
    b.finish(out, VarSet::range(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guarded_round_trip() {
        let c = crate::circuit::tests::guarded();
        let text = write_nnf(&c).unwrap();
        assert!(text.starts_with("nnf 6 6 4\n"));
        let d = read_nnf(&text).unwrap();
        assert_eq!(write_nnf(&d).unwrap(), text);
    }

    #[test]
    fn constants() {
        let t = read_nnf("nnf 1 0 3\nA 0\n").unwrap();
        assert_eq!(t.as_constant(), Some(true));
        assert_eq!(t.num_vars(), 3);
        let f = read_nnf("nnf 1 0 0\nO 0 0\n").unwrap();
        assert_eq!(f.as_constant(), Some(false));
        assert_eq!(write_nnf(&f).unwrap(), "nnf 1 0 0\nO 0 0\n");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_nnf("nnf 1 0 1\nL 2\n").is_err());
        assert!(read_nnf("nnf 2 1 1\nL 1\nA 1 1\n").is_err());
        assert!(read_nnf("nnf 1 0\nL 1\n").is_err());
        assert!(read_nnf("nnf 2 0 1\nL 1\n").is_err());
    }
}
