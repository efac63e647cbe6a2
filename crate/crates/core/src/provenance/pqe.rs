use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::readonce::read_once_to_obdd_over;
use super::{
    fact_universe, fact_var, is_hierarchical, provenance_dnf_ucq, provenance_read_once, ProvError, ReadOnce, Tid,
    BRUTE_FORCE_LIMIT, SHAPLEY_BRUTE_FORCE_LIMIT,
};
use crate::circuit::{condition, Circuit, DnfFormula, PartialValuation, Var};
use crate::cq::{ConjunctiveQuery, Database, FactId, Ucq};
use crate::queries::{
    approx_count_dnf, count_by_cardinality, model_count, prepare_for_counting, wmc, ApproxParams, RationalSemiring,
};

#[derive(Clone, Debug, PartialEq)]
pub enum PqeMode {
    /// Weighted counting on the OBDD of the read-once provenance.
    ExactHierarchical,
    /// Karp–Luby estimation on the provenance DNF.
    ApproxDnf(ApproxParams),
    /// Sum over the subsets of the facts the provenance mentions.
    BruteForce,
}

/// The single conjunctive query of `u` when it has a read-once provenance.
fn tractable(u: &Ucq) -> Option<&ConjunctiveQuery> {
    match u.disjuncts.as_slice() {
        [q] => matches!(is_hierarchical(&q.boolean()), Ok(true)).then_some(q),
        _ => None,
    }
}

/// Provenance DNF as bit masks over the facts it mentions.
struct MaskDnf {
    vars: Vec<Var>,
    terms: Vec<u64>,
}

impl MaskDnf {
    fn new(d: &DnfFormula, limit: usize) -> Result<MaskDnf, ProvError> {
        let vars = d.vars().to_vec();
        if vars.len() > limit {
            return Err(ProvError::TooLargeForBruteForce { facts: vars.len(), limit });
        }
        let bit = |v: Var| 1u64 << vars.binary_search(&v).expect("term variable");
        let terms = d.terms().iter().map(|t| t.iter().map(|l| bit(l.var())).fold(0, |a, b| a | b)).collect();
        Ok(MaskDnf { vars, terms })
    }

    fn holds(&self, mask: u64) -> bool {
        self.terms.iter().any(|&t| t & !mask == 0)
    }
}

/// Probability that the Boolean version of `u` holds on a random
/// subinstance of the TID.
pub fn pqe(u: &Ucq, tid: &Tid, mode: &PqeMode) -> Result<BigRational, ProvError> {
    let u = boolean(u);
    match mode {
        PqeMode::ExactHierarchical => {
            let [q] = u.disjuncts.as_slice() else { return Err(ProvError::NotConjunctive) };
            let t = provenance_read_once(q, &tid.db)?;
            let c = obdd(&t, &tid.db);
            Ok(wmc(&*prepare_for_counting(&c)?, &tid.weights(), &RationalSemiring)?)
        }
        PqeMode::ApproxDnf(params) => Ok(approx_count_dnf(&provenance_dnf_ucq(&u, &tid.db)?, &tid.weights(), params)?),
        PqeMode::BruteForce => brute_force_probability(&provenance_dnf_ucq(&u, &tid.db)?, tid),
    }
}

fn boolean(u: &Ucq) -> Ucq {
    Ucq { disjuncts: u.disjuncts.iter().map(ConjunctiveQuery::boolean).collect() }
}

fn obdd(t: &ReadOnce, db: &Database) -> Circuit {
    read_once_to_obdd_over(t, fact_universe(db))
}

/// Exact probability of a monotone provenance DNF by enumerating the
/// subsets of its facts.
pub fn brute_force_probability(d: &DnfFormula, tid: &Tid) -> Result<BigRational, ProvError> {
    let m = MaskDnf::new(d, BRUTE_FORCE_LIMIT)?;
    let probs: Vec<&BigRational> = m.vars.iter().map(|&v| tid.prob(FactId(v.0))).collect();
    let mut total = BigRational::zero();
    for mask in 0..1u64 << m.vars.len() {
        if m.holds(mask) {
            total += probs.iter().enumerate().fold(BigRational::one(), |acc, (i, p)| {
                if mask >> i & 1 == 1 {
                    acc * *p
                } else {
                    acc * (BigRational::one() - *p)
                }
            });
        }
    }
    Ok(total)
}

/// Number of subinstances on which the Boolean version of `u` holds.
pub fn uniform_reliability(u: &Ucq, db: &Database) -> Result<BigUint, ProvError> {
    let u = boolean(u);
    if let Some(q) = tractable(&u) {
        let t = provenance_read_once(q, db)?;
        return Ok(model_count(&*prepare_for_counting(&obdd(&t, db))?)?);
    }
    let m = MaskDnf::new(&provenance_dnf_ucq(&u, db)?, BRUTE_FORCE_LIMIT)?;
    let hits = (0..1u64 << m.vars.len()).filter(|&mask| m.holds(mask)).count();
    Ok(BigUint::from(hits) << (db.len() - m.vars.len()))
}

/// Shapley value of an endogenous fact in the game whose value on a set
/// `S` of endogenous facts is whether `u` holds on `S` plus every
/// exogenous fact.
pub fn shapley(u: &Ucq, tid: &Tid, target: FactId) -> Result<BigRational, ProvError> {
    if target.index() >= tid.db.len() {
        return Err(ProvError::UnknownFact(format!("#{}", target.0)));
    }
    if tid.is_exogenous(target) {
        return Err(ProvError::TargetExogenous);
    }
    let u = boolean(u);
    let n = tid.endogenous().len();
    let (plus, minus) = match tractable(&u) {
        Some(q) => {
            let t = provenance_read_once(q, &tid.db)?;
            let base: PartialValuation = tid.exogenous().into_iter().map(|f| (fact_var(f), true)).collect();
            let c = condition(&obdd(&t, &tid.db), &base);
            let count = |v: bool| -> Result<Vec<BigUint>, ProvError> {
                let ct = condition(&c, &PartialValuation::new().with(fact_var(target), v));
                Ok(count_by_cardinality(&*prepare_for_counting(&ct)?)?)
            };
            (count(true)?, count(false)?)
        }
        None => shapley_counts(&u, tid, target)?,
    };
    let fact = |k: usize| -> BigInt { (1..=k).map(BigInt::from).product() };
    let mut total = BigRational::zero();
    for k in 0..n {
        let diff = BigInt::from(plus.get(k).cloned().unwrap_or_default())
            - BigInt::from(minus.get(k).cloned().unwrap_or_default());
        if !diff.is_zero() {
            total += BigRational::new(diff * fact(k) * fact(n - 1 - k), fact(n));
        }
    }
    Ok(total)
}

/// Per-cardinality counts of coalitions without `target` that satisfy the
/// query with and without it, by enumeration.
fn shapley_counts(u: &Ucq, tid: &Tid, target: FactId) -> Result<(Vec<BigUint>, Vec<BigUint>), ProvError> {
    let others: Vec<FactId> = tid.endogenous().into_iter().filter(|&f| f != target).collect();
    if others.len() + 1 > SHAPLEY_BRUTE_FORCE_LIMIT {
        return Err(ProvError::NoTractablePathAndTooLarge {
            facts: others.len() + 1,
            limit: SHAPLEY_BRUTE_FORCE_LIMIT,
        });
    }
    let m = MaskDnf::new(&provenance_dnf_ucq(u, &tid.db)?, 64)?;
    let bit_of = |f: FactId| m.vars.binary_search(&fact_var(f)).map(|i| 1u64 << i).unwrap_or(0);
    let exo: u64 = tid.exogenous().into_iter().map(bit_of).fold(0, |a, b| a | b);
    let t = bit_of(target);
    let bits: Vec<u64> = others.iter().map(|&f| bit_of(f)).collect();
    let mut plus = vec![0u64; others.len() + 1];
    let mut minus = vec![0u64; others.len() + 1];
    for s in 0..1u64 << others.len() {
        let mask = bits.iter().enumerate().filter(|(i, _)| s >> i & 1 == 1).fold(exo, |a, (_, b)| a | b);
        let k = s.count_ones() as usize;
        plus[k] += m.holds(mask | t) as u64;
        minus[k] += m.holds(mask) as u64;
    }
    let big = |v: Vec<u64>| v.into_iter().map(BigUint::from).collect();
    Ok((big(plus), big(minus)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::parse_ucq;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn example() -> Tid {
        Tid::uniform(Database::parse_tsv("R\ta\nR\ta'\nS\tb\n").unwrap(), r(1, 2)).unwrap()
    }

    #[test]
    fn example_probability() {
        let u = parse_ucq("Q() :- R(x), S(y).").unwrap();
        let tid = example();
        assert_eq!(pqe(&u, &tid, &PqeMode::ExactHierarchical).unwrap(), r(3, 8));
        assert_eq!(pqe(&u, &tid, &PqeMode::BruteForce).unwrap(), r(3, 8));
        let params = ApproxParams { epsilon: r(1, 10), delta: r(1, 10), seed: 7 };
        let est = pqe(&u, &tid, &PqeMode::ApproxDnf(params)).unwrap();
        assert!((est - r(3, 8)) * r(10, 1) <= r(3, 8) * r(1, 1));
        assert_eq!(uniform_reliability(&u, &tid.db).unwrap(), BigUint::from(3u8));
    }

    #[test]
    fn certain_facts() {
        let u = parse_ucq("Q() :- R(x), S(y).").unwrap();
        let tid = Tid::uniform(example().db, BigRational::one()).unwrap();
        assert_eq!(pqe(&u, &tid, &PqeMode::ExactHierarchical).unwrap(), BigRational::one());
    }

    #[test]
    fn exact_needs_hierarchy() {
        let u = parse_ucq("Q() :- R(x), S(x, y), T(y).").unwrap();
        let db = Database::parse_tsv("R\t1\nS\t1\t2\nT\t2\n").unwrap();
        let tid = Tid::uniform(db, r(1, 2)).unwrap();
        assert_eq!(pqe(&u, &tid, &PqeMode::ExactHierarchical), Err(ProvError::NotHierarchical));
        assert_eq!(pqe(&u, &tid, &PqeMode::BruteForce).unwrap(), r(1, 8));
        assert_eq!(uniform_reliability(&u, &tid.db).unwrap(), BigUint::from(1u8));
    }

    #[test]
    fn shapley_values() {
        let u = parse_ucq("Q() :- R(x).").unwrap();
        let tid = Tid::uniform(Database::parse_tsv("R\ta\nR\tb\n").unwrap(), r(1, 2)).unwrap();
        assert_eq!(shapley(&u, &tid, FactId(0)).unwrap(), r(1, 2));
        assert_eq!(shapley(&u, &tid, FactId(1)).unwrap(), r(1, 2));
        let mut one = Tid::uniform(Database::parse_tsv("R\ta\nS\tb\n").unwrap(), r(1, 2)).unwrap();
        one.set_exogenous(FactId(1), true);
        let u2 = parse_ucq("Q() :- R(x), S(y).").unwrap();
        assert_eq!(shapley(&u2, &one, FactId(0)).unwrap(), BigRational::one());
        assert_eq!(shapley(&u2, &one, FactId(1)), Err(ProvError::TargetExogenous));
    }

    #[test]
    fn shapley_paths_agree() {
        let db = Database::parse_tsv("R\t1\nR\t2\nS\t1\t5\nS\t1\t6\nS\t2\t5\nS\t3\t3\n").unwrap();
        let mut tid = Tid::uniform(db, r(1, 2)).unwrap();
        tid.set_exogenous(FactId(3), true);
        let u = parse_ucq("Q() :- R(x), S(x, y).").unwrap();
        for f in tid.endogenous() {
            let fast = shapley(&u, &tid, f).unwrap();
            let slow = shapley_counts(&u, &tid, f).unwrap();
            let n = tid.endogenous().len();
            let fact = |k: usize| -> BigInt { (1..=k).map(BigInt::from).product() };
            let mut total = BigRational::zero();
            for k in 0..n {
                let d = BigInt::from(slow.0[k].clone()) - BigInt::from(slow.1[k].clone());
                total += BigRational::new(d * fact(k) * fact(n - 1 - k), fact(n));
            }
            assert_eq!(fast, total, "fact {f:?}");
        }
    }
}
