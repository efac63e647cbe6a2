use std::fmt::Write as _;

use super::{CnfError, CnfFormula};
use crate::circuit::{DnfFormula, Lit};

/// Parses DIMACS CNF. A final clause missing its terminating `0` is accepted.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let (n, clauses) = parse_lines(text, "cnf")?;
    Ok(CnfFormula::new(n, clauses))
}

/// Parses a DNF in DIMACS layout: header `p dnf <vars> <terms>`, then one
/// `0`-terminated term per line. Returns the variable count with the formula.
pub fn parse_dimacs_dnf(text: &str) -> Result<(usize, DnfFormula), CnfError> {
    let (n, terms) = parse_lines(text, "dnf")?;
    let d = DnfFormula::new(terms).map_err(|v| CnfError::ContradictoryTerm(v.to_string()))?;
    Ok((n, d))
}

pub fn write_dimacs_dnf(num_vars: usize, d: &DnfFormula) -> String {
    let mut s = format!("p dnf {} {}\n", num_vars, d.terms().len());
    for t in d.terms() {
        for l in t {
            write!(s, "{} ", l.to_dimacs()).unwrap();
        }
        s.push_str("0\n");
    }
    s
}

fn parse_lines(text: &str, kind: &str) -> Result<(usize, Vec<Vec<Lit>>), CnfError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut last_line = 0;
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(CnfError::MalformedHeader { line: ln, msg: "duplicate header".into() });
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let parsed = match toks.as_slice() {
                ["p", k, n, m] if *k == kind => n.parse().ok().zip(m.parse().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| CnfError::MalformedHeader {
                line: ln,
                msg: format!("expected `p {kind} <vars> <count>`"),
            })?);
            continue;
        }
        let Some((n, _)) = header else {
            return Err(CnfError::MalformedHeader { line: ln, msg: "clause before header".into() });
        };
        last_line = ln;
        for tok in line.split_whitespace() {
            let l: i64 = tok.parse().map_err(|_| CnfError::InvalidToken { line: ln, token: tok.into() })?;
            if l == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if l.unsigned_abs() as usize > n {
                return Err(CnfError::LiteralOutOfRange { line: ln, lit: l, num_vars: n });
            } else {
                current.push(Lit::from_dimacs(l).expect("non-zero"));
            }
        }
    }
    let (n, m) = header.ok_or(CnfError::MalformedHeader { line: last_line.max(1), msg: "missing header".into() })?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != m {
        return Err(CnfError::ClauseCountMismatch { declared: m, found: clauses.len() });
    }
    Ok((n, clauses))
}

pub fn write_dimacs(f: &CnfFormula) -> String {
    let mut s = format!("p cnf {} {}\n", f.num_vars, f.clauses.len());
    for cl in &f.clauses {
        for l in cl {
            write!(s, "{} ", l.to_dimacs()).unwrap();
        }
        s.push_str("0\n");
    }
    s
}
