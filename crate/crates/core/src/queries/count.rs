use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{require_smooth_d_dnnf, QueryError, Semiring, WeightMap};
use crate::circuit::{Circuit, Node};

/// Number of satisfying valuations over the circuit's universe.
pub fn model_count(c: &Circuit) -> Result<BigUint, QueryError> {
    require_smooth_d_dnnf(c)?;
    let mut vals: Vec<BigUint> = Vec::with_capacity(c.num_nodes());
    for n in c.nodes() {
        let v = match n {
            Node::True | Node::Lit(_) => BigUint::one(),
            Node::False => BigUint::zero(),
            Node::And(cs) => {
                let mut acc = BigUint::one();
                for ch in cs.iter() {
                    if acc.is_zero() {
                        break;
                    }
                    acc *= &vals[ch.index()];
                }
                acc
            }
            Node::Or(cs) => cs.iter().map(|ch| &vals[ch.index()]).sum(),
            Node::Not(_) => unreachable!("NNF checked"),
        };
        vals.push(v);
    }
    let free = c.universe().len() - c.varset(c.output()).expect("valid").len();
    Ok(vals.pop().expect("non-empty") << free)
}

/// ⊕ over satisfying valuations of the ⊗ of their literal weights.
pub fn wmc<S: Semiring>(c: &Circuit, w: &WeightMap<S::Elem>, s: &S) -> Result<S::Elem, QueryError> {
    require_smooth_d_dnnf(c)?;
    w.check_covers(c.universe())?;
    let mut vals: Vec<S::Elem> = Vec::with_capacity(c.num_nodes());
    for n in c.nodes() {
        let v = match n {
            Node::True => s.one(),
            Node::False => s.zero(),
            Node::Lit(l) => w.get(*l).expect("covered").clone(),
            Node::And(cs) => cs.iter().fold(s.one(), |acc, ch| s.mul(&acc, &vals[ch.index()])),
            Node::Or(cs) => cs.iter().fold(s.zero(), |acc, ch| s.add(&acc, &vals[ch.index()])),
            Node::Not(_) => unreachable!("NNF checked"),
        };
        vals.push(v);
    }
    let root_vars = c.varset(c.output()).expect("valid");
    let mut out = vals.pop().expect("non-empty");
    for v in c.universe().difference(root_vars).iter() {
        let (p, q) = w.pair(v).expect("covered");
        out = s.mul(&out, &s.add(p, q));
    }
    Ok(out)
}

/// Entry `k` is the number of satisfying valuations with exactly `k` true variables.
pub fn count_by_cardinality(c: &Circuit) -> Result<Vec<BigUint>, QueryError> {
    require_smooth_d_dnnf(c)?;
    let mut vals: Vec<Vec<BigUint>> = Vec::with_capacity(c.num_nodes());
    for n in c.nodes() {
        let v = match n {
            Node::True => vec![BigUint::one()],
            Node::False => vec![BigUint::zero()],
            Node::Lit(l) if l.is_positive() => vec![BigUint::zero(), BigUint::one()],
            Node::Lit(_) => vec![BigUint::one(), BigUint::zero()],
            Node::And(cs) => cs.iter().fold(vec![BigUint::one()], |acc, ch| convolve(&acc, &vals[ch.index()])),
            Node::Or(cs) => {
                let len = cs.iter().map(|ch| vals[ch.index()].len()).max().unwrap_or(1);
                let mut acc = vec![BigUint::zero(); len];
                for ch in cs.iter() {
                    for (a, b) in acc.iter_mut().zip(&vals[ch.index()]) {
                        *a += b;
                    }
                }
                acc
            }
            Node::Not(_) => unreachable!("NNF checked"),
        };
        vals.push(v);
    }
    let free = c.universe().len() - c.varset(c.output()).expect("valid").len();
    let mut out = vals.pop().expect("non-empty");
    out = convolve(&out, &binomials(free));
    out.resize(c.universe().len() + 1, BigUint::zero());
    Ok(out)
}

fn convolve(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

pub(crate) fn binomials(n: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for _ in 0..n {
        let mut next = vec![BigUint::one(); row.len() + 1];
        for i in 1..row.len() {
            next[i] = &row[i - 1] + &row[i];
        }
        row = next;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{smooth, Var, VarSet};
    use crate::queries::fixtures::{guarded_decision, two_rs_one_s};
    use crate::queries::{Counting, RationalSemiring};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn nums(v: &[u32]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn guarded_counts() {
        let c = smooth(&guarded_decision()).unwrap();
        assert_eq!(model_count(&c).unwrap(), BigUint::from(6u8));
        assert_eq!(count_by_cardinality(&c).unwrap(), nums(&[0, 1, 3, 2, 0]));
        assert_eq!(model_count(&guarded_decision()).unwrap_err(), QueryError::NotSmoothDeterministicDnnf);
    }

    #[test]
    fn constant_true_counts_all() {
        let c = Circuit::constant(true, VarSet::range(5));
        assert_eq!(model_count(&c).unwrap(), BigUint::from(32u8));
        let c = Circuit::constant(true, VarSet::range(3));
        assert_eq!(count_by_cardinality(&c).unwrap(), nums(&[1, 3, 3, 1]));
    }

    #[test]
    fn two_rs_one_s_weights() {
        let c = smooth(&two_rs_one_s()).unwrap();
        assert_eq!(model_count(&c).unwrap(), BigUint::from(3u8));
        assert_eq!(count_by_cardinality(&c).unwrap(), nums(&[0, 0, 2, 1]));
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let w = WeightMap::uniform(c.universe(), half.clone(), half);
        let p = wmc(&c, &w, &RationalSemiring).unwrap();
        assert_eq!(p, BigRational::new(BigInt::from(3), BigInt::from(8)));
        let ones = WeightMap::uniform(c.universe(), BigUint::one(), BigUint::one());
        assert_eq!(wmc(&c, &ones, &Counting).unwrap(), BigUint::from(3u8));
        let mut partial = WeightMap::new();
        partial.set(Var(0), BigUint::one(), BigUint::one());
        assert_eq!(wmc(&c, &partial, &Counting).unwrap_err(), QueryError::IncompleteWeightMap(Var(1)));
    }
}
