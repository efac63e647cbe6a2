use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// A commutative semiring `(K, ⊕, ⊗, 0, 1)`.
pub trait Semiring {
    type Elem: Clone;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
}

/// Natural numbers with + and ×.
#[derive(Clone, Copy, Debug, Default)]
pub struct Counting;

impl Semiring for Counting {
    type Elem = BigUint;
    fn zero(&self) -> BigUint {
        BigUint::zero()
    }
    fn one(&self) -> BigUint {
        BigUint::one()
    }
    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a + b
    }
    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b
    }
}

/// Exact rationals with + and ×.
#[derive(Clone, Copy, Debug, Default)]
pub struct RationalSemiring;

impl Semiring for RationalSemiring {
    type Elem = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct FloatSemiring;

impl Semiring for FloatSemiring {
    type Elem = f64;
    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
}

/// Non-negative rationals with max and ×; zero is the bottom element.
#[derive(Clone, Copy, Debug, Default)]
pub struct MaxTimes;

impl Semiring for MaxTimes {
    type Elem = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a.max(b).clone()
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn laws<S: Semiring>(s: &S, samples: &[S::Elem])
    where
        S::Elem: PartialEq + std::fmt::Debug,
    {
        for a in samples {
            assert_eq!(s.add(&s.zero(), a), *a);
            assert_eq!(s.mul(&s.one(), a), *a);
            assert_eq!(s.mul(&s.zero(), a), s.zero());
        }
    }

    #[test]
    fn identities() {
        laws(&Counting, &[BigUint::from(0u8), BigUint::from(7u8)]);
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        laws(&RationalSemiring, &[r(1, 3), r(-2, 5)]);
        laws(&MaxTimes, &[r(1, 3), r(9, 2)]);
        laws(&FloatSemiring, &[0.25, 3.0]);
    }
}
