//! Text format for relational circuits.
//!
//! ```text
//! rc <nodes> <edges> <attrs>
//! a <name> <k> <v1> … <vk>      one line per attribute, domain in order
//! u <a1> … <am>                 optional: attributes in the universe
//! o <a1> … <am>                 optional: attribute order
//! z <d1> … <dA>                 optional: zero-suppressed defaults
//! I <a> <d>                     input a/d (d a domain index)
//! U <c> <i1> … <ic>             extended union; `U 0` is the empty relation
//! J <c> <i1> … <ic>             join; `J 0` is the unit relation
//! ```

use std::fmt::Write as _;
use std::sync::Arc;

use super::{AttrId, Attribute, RelCircuit, RelError, RelId, RelNode, Schema, UnionSemantics};
use crate::circuit::VarSet;
use crate::value::Value;

pub fn write_rel(c: &RelCircuit) -> String {
    let schema = c.schema();
    let mut s = format!("rc {} {} {}\n", c.num_nodes(), c.size(), schema.len());
    for a in schema.attrs() {
        write!(s, "a {} {}", Value::Str(a.name.clone()).to_token(), a.domain.len()).unwrap();
        for v in &a.domain {
            write!(s, " {}", v.to_token()).unwrap();
        }
        s.push('\n');
    }
    let list = |tag: &str, xs: &mut dyn Iterator<Item = u32>| {
        let mut line = tag.to_string();
        for x in xs {
            write!(line, " {x}").unwrap();
        }
        line.push('\n');
        line
    };
    if *c.universe() != VarSet::range(schema.len()) {
        s.push_str(&list("u", &mut c.universe().iter().map(|v| v.0)));
    }
    if let Some(o) = c.order() {
        s.push_str(&list("o", &mut o.iter().map(|a| a.0)));
    }
    if let UnionSemantics::ZeroSuppressed(d) = c.semantics() {
        s.push_str(&list("z", &mut d.iter().copied()));
    }
    for n in c.nodes() {
        match n {
            RelNode::Atom { attr, value } => writeln!(s, "I {} {}", attr.0, value).unwrap(),
            RelNode::Empty => s.push_str("U 0\n"),
            RelNode::Unit => s.push_str("J 0\n"),
            RelNode::Union(cs) => s.push_str(&list(&format!("U {}", cs.len()), &mut cs.iter().map(|k| k.0))),
            RelNode::Join(cs) => s.push_str(&list(&format!("J {}", cs.len()), &mut cs.iter().map(|k| k.0))),
        }
    }
    s
}

fn err(line: usize, msg: impl Into<String>) -> RelError {
    RelError::Format { line, msg: msg.into() }
}

fn nums(line: usize, toks: &[&str]) -> Result<Vec<u32>, RelError> {
    toks.iter().map(|t| t.parse().map_err(|_| err(line, format!("invalid number `{t}`")))).collect()
}

pub fn read_rel(text: &str) -> Result<RelCircuit, RelError> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('c'));
    let (ln, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let [_, v, e, a] = match h.as_slice() {
        ["rc", rest @ ..] if rest.len() == 3 => [h[0], rest[0], rest[1], rest[2]],
        _ => return Err(err(ln, "expected `rc <nodes> <edges> <attrs>`")),
    };
    let hv = nums(ln, &[v, e, a])?;
    let (n_nodes, n_edges, n_attrs) = (hv[0] as usize, hv[1] as usize, hv[2] as usize);

    let mut attrs = Vec::with_capacity(n_attrs);
    let mut universe: Option<VarSet> = None;
    let mut order: Option<Vec<AttrId>> = None;
    let mut semantics = UnionSemantics::FullDomain;
    let mut nodes: Vec<RelNode> = Vec::with_capacity(n_nodes);
    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "a" => {
                if !nodes.is_empty() || toks.len() < 3 {
                    return Err(err(ln, "attribute lines come first: `a <name> <k> <values>`"));
                }
                let name = match Value::from_token(toks[1]) {
                    Some(Value::Str(s)) => s,
                    Some(v) => v.to_string(),
                    None => return Err(err(ln, "invalid attribute name")),
                };
                let k = nums(ln, &toks[2..3])?[0] as usize;
                if toks.len() != 3 + k {
                    return Err(err(ln, format!("expected {k} domain values")));
                }
                let domain: Option<Vec<Value>> = toks[3..].iter().map(|t| Value::from_token(t)).collect();
                attrs.push(Attribute { name, domain: domain.ok_or_else(|| err(ln, "invalid domain value"))? });
            }
            "u" => universe = Some(nums(ln, &toks[1..])?.into_iter().map(crate::circuit::Var).collect()),
            "o" => order = Some(nums(ln, &toks[1..])?.into_iter().map(AttrId).collect()),
            "z" => semantics = UnionSemantics::ZeroSuppressed(nums(ln, &toks[1..])?),
            "I" => {
                let x = nums(ln, &toks[1..])?;
                let [attr, value] = x[..] else { return Err(err(ln, "expected `I <attr> <value>`")) };
                nodes.push(RelNode::Atom { attr: AttrId(attr), value });
            }
            "U" | "J" => {
                let x = nums(ln, &toks[1..])?;
                let (&c, ids) = x.split_first().ok_or_else(|| err(ln, "missing child count"))?;
                if ids.len() != c as usize {
                    return Err(err(ln, format!("expected {c} children")));
                }
                let ids: Box<[RelId]> = ids.iter().map(|&i| RelId(i)).collect();
                nodes.push(match (toks[0], ids.len()) {
                    ("U", 0) => RelNode::Empty,
                    ("J", 0) => RelNode::Unit,
                    ("U", _) => RelNode::Union(ids),
                    _ => RelNode::Join(ids),
                });
            }
            t => return Err(err(ln, format!("unknown line type `{t}`"))),
        }
    }
    if attrs.len() != n_attrs {
        return Err(err(ln, format!("header declares {n_attrs} attributes, found {}", attrs.len())));
    }
    if nodes.len() != n_nodes {
        return Err(err(ln, format!("header declares {n_nodes} nodes, found {}", nodes.len())));
    }
    let edges: usize = nodes.iter().map(|n| n.children().len()).sum();
    if edges != n_edges {
        return Err(err(ln, format!("header declares {n_edges} edges, found {edges}")));
    }
    for (i, n) in nodes.iter().enumerate() {
        if let RelNode::Atom { attr, .. } = n {
            if attr.index() >= n_attrs {
                return Err(RelError::AttrOutsideUniverse(attr.0));
            }
        }
        for k in n.children() {
            if k.index() >= i {
                return Err(RelError::NotTopological { node: i as u32, child: k.0 });
            }
        }
    }
    let schema = Arc::new(Schema::new(attrs)?);
    let universe = universe.unwrap_or_else(|| VarSet::range(n_attrs));
    let c = RelCircuit::new(schema, nodes, universe, semantics)?;
    match order {
        Some(o) => c.with_order(o),
        None => Ok(c),
    }
}
