use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{QueryError, WeightMap};
use crate::circuit::{DnfFormula, Lit};

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxParams {
    pub epsilon: BigRational,
    pub delta: BigRational,
    pub seed: u64,
}

impl ApproxParams {
    fn validate(&self) -> Result<(f64, f64), QueryError> {
        let unit = |x: &BigRational| *x > BigRational::zero() && *x < BigRational::one();
        if !unit(&self.epsilon) || !unit(&self.delta) {
            return Err(QueryError::InvalidParams("epsilon and delta must lie in (0, 1)".into()));
        }
        Ok((self.epsilon.to_f64().expect("finite"), self.delta.to_f64().expect("finite")))
    }
}

/// Sample count `⌈3·m·ln(2/δ)/ε²⌉` for `m` terms.
pub fn karp_luby_samples(terms: usize, params: &ApproxParams) -> Result<u64, QueryError> {
    let (eps, delta) = params.validate()?;
    Ok((3.0 * terms as f64 * (2.0 / delta).ln() / (eps * eps)).ceil() as u64)
}

fn term_probability(t: &[Lit], w: &WeightMap<BigRational>) -> BigRational {
    t.iter().fold(BigRational::one(), |acc, l| acc * w.get(*l).expect("covered"))
}

/// Karp–Luby estimate of the probability that `d` holds when each variable
/// is independently true with its weight.
///
/// A term is drawn with probability proportional to its own probability,
/// a world is drawn conditioned on that term, and the draw counts when the
/// term is the first one the world satisfies. The estimate is the exact
/// rational `U·hits/N` with `U` the sum of term probabilities.
pub fn approx_count_dnf(
    d: &DnfFormula,
    w: &WeightMap<BigRational>,
    params: &ApproxParams,
) -> Result<BigRational, QueryError> {
    params.validate()?;
    w.check_covers(&d.vars())?;
    if !w.is_probability() {
        return Err(QueryError::InvalidParams("weights must be probabilities (p, 1 - p)".into()));
    }
    let terms: Vec<&Vec<Lit>> = d.terms().iter().collect();
    let probs: Vec<BigRational> = terms.iter().map(|t| term_probability(t, w)).collect();
    match terms.len() {
        0 => return Ok(BigRational::zero()),
        1 => return Ok(probs[0].clone()),
        _ => {}
    }
    let total: BigRational = probs.iter().sum();
    if total.is_zero() {
        return Ok(total);
    }
    let n = karp_luby_samples(terms.len(), params)?;
    let cumulative: Vec<f64> = probs
        .iter()
        .scan(BigRational::zero(), |acc, p| {
            *acc += p;
            Some((&*acc / &total).to_f64().expect("finite"))
        })
        .collect();
    let vars = d.vars();
    let bound = vars.bound();
    let mut p_true = vec![0.0f64; bound];
    for v in vars.iter() {
        p_true[v.index()] = w.pair(v).expect("covered").0.to_f64().expect("finite");
    }
    let var_list = vars.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut world = vec![false; bound];
    let mut hits: u64 = 0;
    for _ in 0..n {
        let u: f64 = rng.gen();
        let i = cumulative.iter().position(|&c| u < c).unwrap_or(terms.len() - 1);
        for &v in &var_list {
            world[v.index()] = rng.gen::<f64>() < p_true[v.index()];
        }
        for l in terms[i] {
            world[l.var().index()] = l.is_positive();
        }
        let sat = |t: &Vec<Lit>| t.iter().all(|l| world[l.var().index()] == l.is_positive());
        if !terms[..i].iter().any(|t| sat(t)) {
            hits += 1;
        }
    }
    Ok(total * BigRational::new(BigInt::from(hits), BigInt::from(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Var;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn params(seed: u64) -> ApproxParams {
        ApproxParams { epsilon: r(1, 10), delta: r(1, 3), seed }
    }

    #[test]
    fn overlapping_terms_within_band() {
        let x = |i| Lit::pos(Var(i));
        let d = DnfFormula::new([vec![x(0), x(1)], vec![x(1), x(2)]]).unwrap();
        let w = WeightMap::probabilities((0..3).map(|i| (Var(i), r(1, 2))));
        let est = approx_count_dnf(&d, &w, &params(3)).unwrap();
        assert!(est >= r(3375, 10000) && est <= r(4125, 10000), "{est}");
    }

    #[test]
    fn one_term_is_exact_and_empty_is_zero() {
        let d = DnfFormula::new([vec![Lit::pos(Var(0))]]).unwrap();
        let w = WeightMap::probabilities([(Var(0), r(7, 10))]);
        for seed in 0..5 {
            assert_eq!(approx_count_dnf(&d, &w, &params(seed)).unwrap(), r(7, 10));
        }
        let e = DnfFormula::new(Vec::<Vec<Lit>>::new()).unwrap();
        assert_eq!(approx_count_dnf(&e, &w, &params(0)).unwrap(), r(0, 1));
    }

    #[test]
    fn sample_bound() {
        assert_eq!(karp_luby_samples(2, &params(0)).unwrap(), 1076);
        let bad = ApproxParams { epsilon: r(3, 2), delta: r(1, 3), seed: 0 };
        assert!(karp_luby_samples(2, &bad).is_err());
    }
}
