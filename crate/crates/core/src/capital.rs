//! Exact nonnegative dyadic rationals for martingale capital.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CapitalError {
    #[error("division by zero capital")]
    DivisionByZero,
    #[error("result {0} is not a dyadic rational")]
    NonDyadic(String),
    #[error("subtraction would go negative")]
    Negative,
}

/// `numerator / 2^exponent`, kept canonical: the numerator is odd, or it is
/// zero and the exponent is zero. Canonical form makes the derived equality
/// and hashing value-based.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Capital {
    numerator: BigUint,
    exponent: u64,
}

impl Capital {
    pub fn zero() -> Self {
        Self {
            numerator: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: u64) -> Self {
        Self::new(BigUint::from(n), 0)
    }

    /// `numerator / 2^exponent`, canonicalized.
    pub fn new(numerator: BigUint, exponent: u64) -> Self {
        if numerator.is_zero() {
            return Self::zero();
        }
        let tz = numerator.trailing_zeros().unwrap_or(0).min(exponent);
        if tz == 0 {
            return Self {
                numerator,
                exponent,
            };
        }
        Self {
            numerator: numerator >> tz,
            exponent: exponent - tz,
        }
    }

    pub fn dyadic(numerator: u64, exponent: u64) -> Self {
        Self::new(BigUint::from(numerator), exponent)
    }

    /// `2^k` for any signed `k`.
    pub fn pow2(k: i64) -> Self {
        if k >= 0 {
            Self::new(BigUint::one() << k as u64, 0)
        } else {
            Self::new(BigUint::one(), k.unsigned_abs())
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    fn aligned(&self, other: &Capital) -> (BigUint, BigUint, u64) {
        let e = self.exponent.max(other.exponent);
        (
            &self.numerator << (e - self.exponent),
            &other.numerator << (e - other.exponent),
            e,
        )
    }

    pub fn checked_sub(&self, other: &Capital) -> Result<Capital, CapitalError> {
        let (a, b, e) = self.aligned(other);
        if a < b {
            return Err(CapitalError::Negative);
        }
        Ok(Capital::new(a - b, e))
    }

    pub fn half(&self) -> Capital {
        Capital::new(self.numerator.clone(), self.exponent + 1)
    }

    pub fn double(&self) -> Capital {
        self.scale_pow2(1)
    }

    pub fn scale_pow2(&self, k: i64) -> Capital {
        if k >= 0 {
            let k = k as u64;
            let shift = k.min(self.exponent);
            Capital::new(&self.numerator << (k - shift), self.exponent - shift)
        } else {
            Capital::new(self.numerator.clone(), self.exponent + k.unsigned_abs())
        }
    }

    /// `x · num / den`, exact. Fails when `den` is zero or the quotient is not
    /// dyadic.
    pub fn mul_ratio(&self, num: &Capital, den: &Capital) -> Result<Capital, CapitalError> {
        if den.is_zero() {
            return Err(CapitalError::DivisionByZero);
        }
        let top = &self.numerator * &num.numerator;
        // den.numerator is odd in canonical form, so divisibility decides dyadicity
        let (q, r) = (&top / &den.numerator, &top % &den.numerator);
        if !r.is_zero() {
            return Err(CapitalError::NonDyadic(format!(
                "{top}/{} * 2^-{}",
                den.numerator,
                self.exponent + num.exponent
            )));
        }
        let exp = self.exponent + num.exponent;
        // multiply by 2^den.exponent
        let shift = den.exponent.min(exp);
        Ok(Capital::new(q << (den.exponent - shift), exp - shift))
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.numerator.to_f64().unwrap_or(f64::INFINITY);
        n / 2f64.powi(self.exponent.min(i32::MAX as u64) as i32)
    }

    /// Decimal approximation for reports.
    pub fn approx(&self) -> String {
        format!("{:.6}", self.to_f64())
    }
}

/// `(x + y) / 2`, exact.
pub fn average2(x: &Capital, y: &Capital) -> Capital {
    (x + y).half()
}

pub fn mul_ratio(x: &Capital, num: &Capital, den: &Capital) -> Result<Capital, CapitalError> {
    x.mul_ratio(num, den)
}

impl Add for &Capital {
    type Output = Capital;

    fn add(self, other: &Capital) -> Capital {
        let (a, b, e) = self.aligned(other);
        Capital::new(a + b, e)
    }
}

impl Add for Capital {
    type Output = Capital;

    fn add(self, other: Capital) -> Capital {
        &self + &other
    }
}

impl Mul for &Capital {
    type Output = Capital;

    fn mul(self, other: &Capital) -> Capital {
        Capital::new(
            &self.numerator * &other.numerator,
            self.exponent + other.exponent,
        )
    }
}

impl Mul for Capital {
    type Output = Capital;

    fn mul(self, other: Capital) -> Capital {
        &self * &other
    }
}

impl std::iter::Sum for Capital {
    fn sum<I: Iterator<Item = Capital>>(iter: I) -> Capital {
        iter.fold(Capital::zero(), |acc, x| &acc + &x)
    }
}

impl Ord for Capital {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for Capital {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for Capital {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<u64> for Capital {
    fn from(n: u64) -> Self {
        Self::from_int(n)
    }
}

impl fmt::Display for Capital {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/2^{}", self.numerator, self.exponent)
        }
    }
}

impl fmt::Debug for Capital {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Capital({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(n: u64, e: u64) -> Capital {
        Capital::dyadic(n, e)
    }

    #[test]
    fn average2_examples() {
        assert_eq!(average2(&c(2, 0), &c(0, 0)), c(1, 0));
        assert_eq!(average2(&c(1, 0), &c(1, 0)), c(1, 0));
        assert_eq!(average2(&c(3, 1), &c(1, 1)), c(1, 0));
    }

    #[test]
    fn mul_ratio_examples() {
        assert_eq!(mul_ratio(&c(1, 0), &c(2, 0), &c(1, 0)).unwrap(), c(2, 0));
        assert_eq!(mul_ratio(&c(4, 0), &c(1, 0), &c(4, 0)).unwrap(), c(1, 0));
        assert!(matches!(
            mul_ratio(&c(1, 0), &c(1, 0), &c(3, 0)),
            Err(CapitalError::NonDyadic(_))
        ));
        assert_eq!(
            mul_ratio(&c(1, 0), &c(1, 0), &Capital::zero()),
            Err(CapitalError::DivisionByZero)
        );
        // 3/4 * (5/8) / (3/2) = 5/16
        assert_eq!(mul_ratio(&c(3, 2), &c(5, 3), &c(3, 1)).unwrap(), c(5, 4));
        // division by a fraction can push the exponent past zero
        assert_eq!(mul_ratio(&c(1, 0), &c(1, 0), &c(1, 3)).unwrap(), c(8, 0));
    }

    #[test]
    fn canonical_form() {
        let x = Capital::new(BigUint::from(12u32), 3);
        assert_eq!(x.numerator(), &BigUint::from(3u32));
        assert_eq!(x.exponent(), 1);
        let z = Capital::new(BigUint::zero(), 9);
        assert_eq!(z.exponent(), 0);
        assert_eq!(c(4, 2), Capital::one());
        assert_eq!(Capital::pow2(-3), c(1, 3));
        assert_eq!(Capital::pow2(70).scale_pow2(-70), Capital::one());
        assert_eq!(c(5, 1).to_string(), "5/2^1");
        assert_eq!(c(3, 1).checked_sub(&c(1, 0)).unwrap(), c(1, 1));
        assert_eq!(c(1, 1).checked_sub(&c(1, 0)), Err(CapitalError::Negative));
    }

    fn arb_cap() -> impl Strategy<Value = Capital> {
        (0u64..1 << 20, 0u64..24).prop_map(|(n, e)| c(n, e))
    }

    proptest! {
        #[test]
        fn average2_commutative_and_idempotent(x in arb_cap(), y in arb_cap()) {
            prop_assert_eq!(average2(&x, &y), average2(&y, &x));
            prop_assert_eq!(average2(&x, &x), x);
        }

        #[test]
        fn fair_split_averages_back(x in arb_cap(), frac in 0u64..=256) {
            // y = 2x * frac/256 ranges over [0, 2x]
            let two_x = x.double();
            let y = &two_x * &c(frac, 8);
            let other = two_x.checked_sub(&y).unwrap();
            prop_assert_eq!(average2(&y, &other), x);
        }

        #[test]
        fn equal_values_are_identical(n in 0u64..1 << 16, e in 0u64..16, k in 0u64..20) {
            let direct = c(n, e);
            let via_shift = Capital::new(BigUint::from(n) << k, e + k);
            prop_assert_eq!(&direct, &via_shift);
            prop_assert_eq!(direct.cmp(&via_shift), Ordering::Equal);
        }
    }
}
