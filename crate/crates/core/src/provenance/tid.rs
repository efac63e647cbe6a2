use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ProvError;
use crate::circuit::Var;
use crate::cq::{data_lines, Database, FactId};
use crate::queries::WeightMap;
use crate::value::{parse_rational, Value};

/// A tuple-independent database: each fact is present independently with
/// its probability. Exogenous facts are always present in Shapley games.
#[derive(Clone, Debug, PartialEq)]
pub struct Tid {
    pub db: Database,
    prob: Vec<BigRational>,
    exogenous: Vec<bool>,
}

impl Tid {
    /// Every fact endogenous with probability `p`.
    pub fn uniform(db: Database, p: BigRational) -> Result<Tid, ProvError> {
        check_prob(&p)?;
        let n = db.len();
        Ok(Tid { db, prob: vec![p; n], exogenous: vec![false; n] })
    }

    pub fn new(db: Database, prob: Vec<BigRational>, exogenous: Vec<bool>) -> Result<Tid, ProvError> {
        assert_eq!(prob.len(), db.len(), "one probability per fact");
        assert_eq!(exogenous.len(), db.len(), "one marker per fact");
        for p in &prob {
            check_prob(p)?;
        }
        Ok(Tid { db, prob, exogenous })
    }

    pub fn prob(&self, f: FactId) -> &BigRational {
        &self.prob[f.index()]
    }

    pub fn is_exogenous(&self, f: FactId) -> bool {
        self.exogenous[f.index()]
    }

    pub fn set_prob(&mut self, f: FactId, p: BigRational) -> Result<(), ProvError> {
        check_prob(&p)?;
        self.prob[f.index()] = p;
        Ok(())
    }

    pub fn set_exogenous(&mut self, f: FactId, exo: bool) {
        self.exogenous[f.index()] = exo;
    }

    pub fn endogenous(&self) -> Vec<FactId> {
        (0..self.db.len() as u32).map(FactId).filter(|&f| !self.is_exogenous(f)).collect()
    }

    pub fn exogenous(&self) -> Vec<FactId> {
        (0..self.db.len() as u32).map(FactId).filter(|&f| self.is_exogenous(f)).collect()
    }

    /// Weights `(π(F), 1 − π(F))` on the fact variables.
    pub fn weights(&self) -> WeightMap<BigRational> {
        WeightMap::probabilities(self.prob.iter().enumerate().map(|(i, p)| (Var(i as u32), p.clone())))
    }

    /// Fact lines `R<TAB>v1…<TAB>p[<TAB>x|n]`. The probability is a decimal
    /// or `p/q`; the marker defaults to `n` (endogenous).
    pub fn parse_tsv(text: &str) -> Result<Tid, ProvError> {
        let mut db = Database::new();
        let mut prob = Vec::new();
        let mut exo = Vec::new();
        for (line, l) in data_lines(text) {
            let err = |msg: String| ProvError::Tsv { line, msg };
            let mut cols: Vec<&str> = l.split('\t').map(str::trim).collect();
            let marker = match cols.last() {
                Some(&"x") => {
                    cols.pop();
                    true
                }
                Some(&"n") => {
                    cols.pop();
                    false
                }
                _ => false,
            };
            if cols.len() < 2 || cols[0].is_empty() {
                return Err(err("expected a relation name and a probability".into()));
            }
            let p_text = cols.pop().expect("checked");
            let p = parse_rational(p_text).ok_or_else(|| err(format!("invalid probability `{p_text}`")))?;
            check_prob(&p).map_err(|e| err(e.to_string()))?;
            let values = cols[1..].iter().map(|c| Value::parse(c)).collect();
            let id = db.insert(cols[0], values).map_err(|e| err(e.to_string()))?;
            if id.index() < prob.len() {
                return Err(err(format!("duplicate fact {}", db.fact(id))));
            }
            prob.push(p);
            exo.push(marker);
        }
        Ok(Tid { db, prob, exogenous: exo })
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for (i, f) in self.db.facts().iter().enumerate() {
            s.push_str(&f.relation);
            for v in &f.values {
                s.push('\t');
                s.push_str(&v.to_string());
            }
            s.push_str(&format!("\t{}\t{}\n", self.prob[i], if self.exogenous[i] { "x" } else { "n" }));
        }
        s
    }
}

fn check_prob(p: &BigRational) -> Result<(), ProvError> {
    if *p < BigRational::zero() || *p > BigRational::one() {
        return Err(ProvError::InvalidProbability(p.to_string()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let t = Tid::parse_tsv("R\ta\t0.5\nR\tb\t1/3\tx\nS\tb\t1\tn\n").unwrap();
        assert_eq!(t.db.len(), 3);
        assert_eq!(*t.prob(FactId(1)), BigRational::new(1.into(), 3.into()));
        assert!(t.is_exogenous(FactId(1)) && !t.is_exogenous(FactId(2)));
        assert_eq!(t.endogenous(), vec![FactId(0), FactId(2)]);
        assert_eq!(Tid::parse_tsv(&t.to_tsv()).unwrap(), t);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(Tid::parse_tsv("R\ta\t1.5\n"), Err(ProvError::Tsv { line: 1, .. })));
        assert!(matches!(Tid::parse_tsv("R\ta\tzz\n"), Err(ProvError::Tsv { line: 1, .. })));
        assert!(matches!(Tid::parse_tsv("R\ta\t0.5\nR\ta\t0.5\n"), Err(ProvError::Tsv { line: 2, .. })));
    }
}
