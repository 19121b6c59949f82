//! Exact rational helpers.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
pub use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational used by the solvers.
pub type Q = BigRational;

/// Largest denominator kept when a floating-point probability is turned into
/// an exact rational.
pub const MAX_DENOMINATOR: i64 = 1_000_000;

pub fn q(numer: i64, denom: i64) -> Q {
    Q::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn qi(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn from_r64(r: Rational64) -> Q {
    q(*r.numer(), *r.denom())
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Closest rational to `x` whose denominator does not exceed `max_den`.
pub fn rationalize(x: f64, max_den: i64) -> Q {
    if x == 0.0 {
        return Q::zero();
    }
    if x == 1.0 {
        return Q::one();
    }
    let exact = match Q::from_float(x) {
        Some(v) => v,
        None => return Q::zero(),
    };
    limit_denominator(&exact, &BigInt::from(max_den))
}

pub fn limit_denominator(v: &Q, max_den: &BigInt) -> Q {
    if v.denom() <= max_den {
        return v.clone();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let (mut n, mut d) = (v.numer().clone(), v.denom().clone());
    loop {
        let a = n.div_floor(&d);
        let q2 = &q0 + &a * &q1;
        if &q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = core::mem::replace(&mut p1, p2);
        q0 = core::mem::replace(&mut q1, q2);
        let r = &n - &a * &d;
        n = core::mem::replace(&mut d, r);
        if d.is_zero() {
            break;
        }
    }
    let k = (max_den - &q0).div_floor(&q1);
    let b1 = Q::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let b2 = Q::new(p1, q1);
    if (&b2 - v).abs() <= (&b1 - v).abs() {
        b2
    } else {
        b1
    }
}

/// Turns a floating-point distribution into exact rationals that sum to one.
pub fn exact_distribution(probs: &[f64]) -> Vec<Q> {
    let mut out: Vec<Q> = probs.iter().map(|&p| rationalize(p.max(0.0), MAX_DENOMINATOR)).collect();
    let total: Q = out.iter().fold(Q::zero(), |acc, p| acc + p);
    if total.is_zero() {
        let n = out.len() as i64;
        return out.iter().map(|_| q(1, n)).collect();
    }
    if !total.is_one() {
        for p in &mut out {
            *p = &*p / &total;
        }
    }
    out
}

pub fn sum(values: &[Q]) -> Q {
    values.iter().fold(Q::zero(), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationalize_recovers_small_fractions() {
        assert_eq!(rationalize(1.0 / 3.0, MAX_DENOMINATOR), q(1, 3));
        assert_eq!(rationalize(0.1, MAX_DENOMINATOR), q(1, 10));
        assert_eq!(rationalize(1.0 / 15.0, MAX_DENOMINATOR), q(1, 15));
        assert_eq!(rationalize(0.333333333333, MAX_DENOMINATOR), q(1, 3));
    }

    #[test]
    fn exact_distribution_sums_to_one() {
        let d = exact_distribution(&[0.2, 0.2, 0.2, 0.2, 0.2000000001]);
        assert!(sum(&d).is_one());
        let u = exact_distribution(&[1.0 / 7.0; 7]);
        assert!(u.iter().all(|p| *p == q(1, 7)));
    }
}
