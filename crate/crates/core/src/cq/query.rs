use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::CqError;
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(Value),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub relation: String,
    pub args: Vec<Term>,
}

impl Atom {
    /// Distinct variables in order of first occurrence.
    pub fn vars(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for t in &self.args {
            if let Term::Var(v) = t {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjunctiveQuery {
    pub name: String,
    /// Free variables, distinct.
    pub head: Vec<String>,
    pub atoms: Vec<Atom>,
}

impl ConjunctiveQuery {
    /// Checks head variables are bound and distinct, and arities agree.
    pub fn new(name: impl Into<String>, head: Vec<String>, atoms: Vec<Atom>) -> Result<Self, CqError> {
        let q = ConjunctiveQuery { name: name.into(), head, atoms };
        let vars: BTreeSet<&str> = q.atoms.iter().flat_map(|a| a.vars()).collect();
        let mut seen = BTreeSet::new();
        for h in &q.head {
            if !vars.contains(h.as_str()) {
                return Err(CqError::UnboundHeadVariable(h.clone()));
            }
            if !seen.insert(h.as_str()) {
                return Err(CqError::Syntax(format!("head variable `{h}` repeated")));
            }
        }
        q.arities()?;
        Ok(q)
    }

    /// Relation name → arity, checking every use agrees.
    pub fn arities(&self) -> Result<BTreeMap<&str, usize>, CqError> {
        let mut out: BTreeMap<&str, usize> = BTreeMap::new();
        for a in &self.atoms {
            if *out.entry(&a.relation).or_insert(a.args.len()) != a.args.len() {
                return Err(CqError::ArityMismatch(a.relation.clone()));
            }
        }
        Ok(out)
    }

    /// All variables: head first, then existential ones by first occurrence.
    pub fn vars(&self) -> Vec<String> {
        let mut out = self.head.clone();
        for a in &self.atoms {
            for v in a.vars() {
                if !out.iter().any(|o| o == v) {
                    out.push(v.to_string());
                }
            }
        }
        out
    }

    pub fn existential_vars(&self) -> Vec<String> {
        self.vars().split_off(self.head.len())
    }

    pub fn is_boolean(&self) -> bool {
        self.head.is_empty()
    }

    pub fn is_self_join_free(&self) -> bool {
        let names: BTreeSet<&str> = self.atoms.iter().map(|a| a.relation.as_str()).collect();
        names.len() == self.atoms.len()
    }

    /// Same body with every variable free.
    pub fn with_all_vars_free(&self) -> ConjunctiveQuery {
        ConjunctiveQuery { name: self.name.clone(), head: self.vars(), atoms: self.atoms.clone() }
    }

    /// Same body with an empty head.
    pub fn boolean(&self) -> ConjunctiveQuery {
        ConjunctiveQuery { name: self.name.clone(), head: Vec::new(), atoms: self.atoms.clone() }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(Value::Int(i)) => write!(f, "{i}"),
            Term::Const(v) => write!(f, "\"{v}\""),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) :- ", self.name, self.head.join(", "))?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ".")
    }
}

/// A union of conjunctive queries sharing one head arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ucq {
    pub disjuncts: Vec<ConjunctiveQuery>,
}

impl From<ConjunctiveQuery> for Ucq {
    fn from(q: ConjunctiveQuery) -> Ucq {
        Ucq { disjuncts: vec![q] }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    Comma,
    Turnstile,
    Dot,
}

fn tokenize(text: &str) -> Result<Vec<Tok>, CqError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some((i, ch)) = it.next() {
        match ch {
            c if c.is_whitespace() => {}
            '%' => {
                // Comment to end of line.
                while it.next_if(|&(_, c)| c != '\n').is_some() {}
            }
            '(' => out.push(Tok::LParen),
            ')' => out.push(Tok::RParen),
            ',' => out.push(Tok::Comma),
            '.' => out.push(Tok::Dot),
            ':' => {
                if it.next_if(|&(_, c)| c == '-').is_none() {
                    return Err(CqError::Syntax(format!("expected `:-` at offset {i}")));
                }
                out.push(Tok::Turnstile);
            }
            '"' | '\'' => {
                let mut s = String::new();
                loop {
                    match it.next() {
                        Some((_, c)) if c == ch => break,
                        Some((_, c)) => s.push(c),
                        None => return Err(CqError::Syntax("unterminated string constant".into())),
                    }
                }
                out.push(Tok::Str(s));
            }
            c if c.is_ascii_digit() || c == '-' => {
                let mut s = String::from(c);
                while let Some((_, d)) = it.next_if(|&(_, d)| d.is_ascii_digit()) {
                    s.push(d);
                }
                let v = s.parse().map_err(|_| CqError::Syntax(format!("invalid integer `{s}`")))?;
                out.push(Tok::Int(v));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::from(c);
                while let Some((_, d)) = it.next_if(|&(_, d)| d.is_alphanumeric() || d == '_' || d == '\'') {
                    s.push(d);
                }
                out.push(Tok::Ident(s));
            }
            c => return Err(CqError::Syntax(format!("unexpected character `{c}` at offset {i}"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), CqError> {
        match self.next() {
            Some(ref got) if *got == t => Ok(()),
            got => Err(CqError::Syntax(format!("expected {what}, found {got:?}"))),
        }
    }

    fn ident(&mut self) -> Result<String, CqError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            got => Err(CqError::Syntax(format!("expected a name, found {got:?}"))),
        }
    }

    fn args(&mut self) -> Result<Vec<Term>, CqError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.next();
            return Ok(args);
        }
        loop {
            args.push(match self.next() {
                Some(Tok::Ident(v)) => Term::Var(v),
                Some(Tok::Int(i)) => Term::Const(Value::Int(i)),
                Some(Tok::Str(s)) => Term::Const(Value::Str(s)),
                got => return Err(CqError::Syntax(format!("expected a term, found {got:?}"))),
            });
            match self.next() {
                Some(Tok::Comma) => {}
                Some(Tok::RParen) => return Ok(args),
                got => return Err(CqError::Syntax(format!("expected `,` or `)`, found {got:?}"))),
            }
        }
    }

    fn rule(&mut self) -> Result<ConjunctiveQuery, CqError> {
        let name = self.ident()?;
        let head = if self.peek() == Some(&Tok::LParen) { self.args()? } else { Vec::new() };
        let head: Vec<String> = head
            .into_iter()
            .map(|t| match t {
                Term::Var(v) => Ok(v),
                Term::Const(c) => Err(CqError::Syntax(format!("constant {c} in head"))),
            })
            .collect::<Result<_, _>>()?;
        self.expect(Tok::Turnstile, "`:-`")?;
        let mut atoms = Vec::new();
        loop {
            let relation = self.ident()?;
            let args = self.args()?;
            atoms.push(Atom { relation, args });
            match self.peek() {
                Some(Tok::Comma) => {
                    self.next();
                }
                Some(Tok::Dot) => {
                    self.next();
                    break;
                }
                None | Some(Tok::Ident(_)) => break,
                got => return Err(CqError::Syntax(format!("expected `,` or `.`, found {got:?}"))),
            }
        }
        ConjunctiveQuery::new(name, head, atoms)
    }
}

/// Parses one rule such as `Q(x, y) :- R(x, y), S(y, z).`
///
/// Identifiers are variables; integers and quoted strings are constants.
/// The head may be `Q()` or just `Q` for a Boolean query.
pub fn parse_cq(text: &str) -> Result<ConjunctiveQuery, CqError> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    let q = p.rule()?;
    if p.peek().is_some() {
        return Err(CqError::Syntax("trailing input after the rule".into()));
    }
    Ok(q)
}

/// Parses one or more rules with the same head arity.
pub fn parse_ucq(text: &str) -> Result<Ucq, CqError> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    let mut disjuncts = Vec::new();
    while p.peek().is_some() {
        disjuncts.push(p.rule()?);
    }
    let Some(first) = disjuncts.first() else {
        return Err(CqError::Syntax("no rules".into()));
    };
    if disjuncts.iter().any(|d| d.head.len() != first.head.len()) {
        return Err(CqError::Syntax("rules have different head arities".into()));
    }
    Ok(Ucq { disjuncts })
}
