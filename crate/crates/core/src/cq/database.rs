use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::CqError;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactId(pub u32);

impl FactId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub relation: String,
    pub values: Vec<Value>,
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// A set of facts. Fact ids follow insertion order; re-inserting a fact
/// returns its existing id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Database {
    facts: Vec<Fact>,
    index: HashMap<Fact, FactId>,
    /// Declared relations with their arity (`None` until a fact fixes it).
    relations: BTreeMap<String, (Option<usize>, Vec<FactId>)>,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a relation, possibly without facts.
    pub fn declare(&mut self, relation: &str, arity: Option<usize>) -> Result<(), CqError> {
        let entry = self.relations.entry(relation.to_string()).or_insert((None, Vec::new()));
        match (entry.0, arity) {
            (Some(a), Some(b)) if a != b => Err(CqError::ArityMismatch(relation.to_string())),
            (None, Some(b)) => {
                entry.0 = Some(b);
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn insert(&mut self, relation: &str, values: Vec<Value>) -> Result<FactId, CqError> {
        self.declare(relation, Some(values.len()))?;
        let fact = Fact { relation: relation.to_string(), values };
        if let Some(&id) = self.index.get(&fact) {
            return Ok(id);
        }
        let id = FactId(self.facts.len() as u32);
        self.relations.get_mut(relation).expect("declared").1.push(id);
        self.index.insert(fact.clone(), id);
        self.facts.push(fact);
        Ok(id)
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn fact(&self, id: FactId) -> &Fact {
        &self.facts[id.index()]
    }

    pub fn find(&self, f: &Fact) -> Option<FactId> {
        self.index.get(f).copied()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn has_relation(&self, name: &str) -> bool {
        self.relations.contains_key(name)
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).and_then(|r| r.0)
    }

    /// Facts of one relation in insertion order.
    pub fn relation(&self, name: &str) -> &[FactId] {
        self.relations.get(name).map(|r| r.1.as_slice()).unwrap_or(&[])
    }

    /// Every value occurring in some fact, sorted.
    pub fn active_domain(&self) -> Vec<Value> {
        let s: BTreeSet<&Value> = self.facts.iter().flat_map(|f| &f.values).collect();
        s.into_iter().cloned().collect()
    }

    /// Combined TSV: one fact per line, `R<TAB>v1<TAB>v2…`. Blank lines and
    /// lines starting with `#` are skipped; values are integers when they
    /// parse as such, strings otherwise.
    pub fn parse_tsv(text: &str) -> Result<Database, CqError> {
        let mut db = Database::new();
        for (i, line) in data_lines(text) {
            let mut cols = line.split('\t');
            let rel = cols.next().unwrap_or("").trim();
            if rel.is_empty() {
                return Err(CqError::Tsv { line: i, msg: "missing relation name".into() });
            }
            let values = cols.map(|c| Value::parse(c.trim())).collect();
            db.insert(rel, values).map_err(|e| CqError::Tsv { line: i, msg: e.to_string() })?;
        }
        Ok(db)
    }

    /// Adds the rows of a single-relation TSV (values only). An empty file
    /// declares an empty relation.
    pub fn add_relation_tsv(&mut self, relation: &str, text: &str) -> Result<(), CqError> {
        self.declare(relation, None)?;
        for (i, line) in data_lines(text) {
            let values = line.split('\t').map(|c| Value::parse(c.trim())).collect();
            self.insert(relation, values).map_err(|e| CqError::Tsv { line: i, msg: e.to_string() })?;
        }
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for f in &self.facts {
            s.push_str(&f.relation);
            for v in &f.values {
                s.push('\t');
                s.push_str(&v.to_string());
            }
            s.push('\n');
        }
        s
    }
}

pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}
