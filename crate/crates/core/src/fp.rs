//! Exact arithmetic in the prime field F_p.
//!
//! Residues are stored canonically in `0..p` and are never lazily reduced.
//! Every binary operation checks that both operands carry the same modulus.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported modulus.
pub const MAX_MODULUS: u64 = 1 << 31;

/// An odd prime `p` with `3 <= p <= 2^31`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeModulus(u32);

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        if p > MAX_MODULUS {
            return Err(Error::ModulusTooLarge(p));
        }
        if p < 3 || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        Ok(PrimeModulus(p as u32))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// `p` as a `usize`, handy for table sizes.
    #[inline]
    pub fn order(self) -> usize {
        self.0 as usize
    }

    /// `(p - 1) / 2`.
    #[inline]
    pub fn half(self) -> u32 {
        (self.0 - 1) / 2
    }

    pub fn element(self, value: u64) -> FieldElement {
        FieldElement {
            value: (value % self.0 as u64) as u32,
            modulus: self,
        }
    }

    /// Reduce a signed integer into the field.
    pub fn element_i64(self, value: i64) -> FieldElement {
        FieldElement {
            value: value.rem_euclid(self.0 as i64) as u32,
            modulus: self,
        }
    }

    pub fn zero(self) -> FieldElement {
        self.element(0)
    }

    pub fn one(self) -> FieldElement {
        self.element(1)
    }

    /// All elements in increasing lifted order.
    pub fn elements(self) -> impl Iterator<Item = FieldElement> {
        (0..self.0).map(move |value| FieldElement {
            value,
            modulus: self,
        })
    }

    #[inline]
    pub fn add_raw(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub fn sub_raw(self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.0 as u64 - b as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub fn mul_raw(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub fn neg_raw(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    pub fn pow_raw(self, base: u32, mut exp: u64) -> u32 {
        let p = self.0 as u64;
        let mut acc = 1 % p;
        let mut b = base as u64 % p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            exp >>= 1;
        }
        acc as u32
    }

    /// Inverse of a nonzero residue via the extended Euclidean algorithm.
    pub fn inv_raw(self, a: u32) -> Option<u32> {
        if a.is_multiple_of(self.0) {
            return None;
        }
        let (mut r0, mut r1) = (self.0 as i64, (a % self.0) as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Some(t0.rem_euclid(self.0 as i64) as u32)
    }
}

impl TryFrom<u64> for PrimeModulus {
    type Error = Error;

    fn try_from(p: u64) -> Result<Self> {
        PrimeModulus::new(p)
    }
}

impl From<PrimeModulus> for u64 {
    fn from(p: PrimeModulus) -> u64 {
        p.0 as u64
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Deterministic trial division; `p <= 2^31` keeps this under ~46k divisions.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// A canonical residue together with its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    modulus: PrimeModulus,
}

impl FieldElement {
    #[inline]
    pub fn modulus(self) -> PrimeModulus {
        self.modulus
    }

    /// The canonical representative in `{0, ..., p-1}`.
    #[inline]
    pub fn lift(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_modulus(self, other: FieldElement) -> Result<PrimeModulus> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.get(),
                right: other.modulus.get(),
            });
        }
        Ok(self.modulus)
    }

    pub fn try_add(self, other: FieldElement) -> Result<FieldElement> {
        let m = self.same_modulus(other)?;
        Ok(FieldElement {
            value: m.add_raw(self.value, other.value),
            modulus: m,
        })
    }

    pub fn try_sub(self, other: FieldElement) -> Result<FieldElement> {
        let m = self.same_modulus(other)?;
        Ok(FieldElement {
            value: m.sub_raw(self.value, other.value),
            modulus: m,
        })
    }

    pub fn try_mul(self, other: FieldElement) -> Result<FieldElement> {
        let m = self.same_modulus(other)?;
        Ok(FieldElement {
            value: m.mul_raw(self.value, other.value),
            modulus: m,
        })
    }

    pub fn try_div(self, other: FieldElement) -> Result<FieldElement> {
        self.same_modulus(other)?;
        self.try_mul(other.inverse()?)
    }

    pub fn inverse(self) -> Result<FieldElement> {
        let value = self.modulus.inv_raw(self.value).ok_or(Error::DivisionByZero)?;
        Ok(FieldElement {
            value,
            modulus: self.modulus,
        })
    }

    pub fn pow(self, exp: u64) -> FieldElement {
        FieldElement {
            value: self.modulus.pow_raw(self.value, exp),
            modulus: self.modulus,
        }
    }

    /// Legendre symbol via Euler's criterion: `a^((p-1)/2)` mapped to -1, 0, +1.
    pub fn legendre(self) -> i8 {
        match self.modulus.pow_raw(self.value, self.modulus.half() as u64) {
            0 => 0,
            1 => 1,
            v => {
                debug_assert_eq!(v, self.modulus.get() - 1);
                -1
            }
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// Operator forms panic on mixed moduli; use the `try_*` methods where the
// moduli are not already known to agree.
macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl std::ops::$trait for FieldElement {
            type Output = FieldElement;

            fn $method(self, rhs: FieldElement) -> FieldElement {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        FieldElement {
            value: self.modulus.neg_raw(self.value),
            modulus: self.modulus,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(matches!(PrimeModulus::new(2), Err(Error::NotOddPrime(2))));
        assert!(matches!(PrimeModulus::new(9), Err(Error::NotOddPrime(9))));
        assert!(matches!(PrimeModulus::new(1), Err(Error::NotOddPrime(1))));
        assert!(PrimeModulus::new((1 << 31) + 11).is_err());
        assert!(PrimeModulus::new(2_147_483_647).is_ok());
    }

    #[test]
    fn basic_ops() {
        let p5 = m(5);
        assert_eq!((p5.element(3) + p5.element(4)).lift(), 2);
        assert_eq!((p5.element(3) * p5.element(4)).lift(), 2);
        let p7 = m(7);
        assert_eq!((p7.element(0) - p7.element(1)).lift(), 6);
        assert_eq!((-p7.element(1)).lift(), 6);
        assert_eq!((-p7.element(0)).lift(), 0);
    }

    #[test]
    fn mixed_moduli_error() {
        let a = m(5).element(1);
        let b = m(7).element(1);
        assert!(matches!(
            a.try_add(b),
            Err(Error::ModulusMismatch { left: 5, right: 7 })
        ));
        assert!(a.try_mul(b).is_err());
        assert!(a.try_sub(b).is_err());
    }

    #[test]
    #[should_panic]
    fn mixed_moduli_operator_panics() {
        let _ = m(5).element(1) + m(7).element(1);
    }

    #[test]
    fn inverses() {
        assert_eq!(m(5).element(2).inverse().unwrap().lift(), 3);
        assert_eq!(m(7).element(1).inverse().unwrap().lift(), 1);
        // scan oracle
        let p13 = m(13);
        let five = p13.element(5);
        let scanned = p13.elements().find(|x| (*x * five).lift() == 1).unwrap();
        assert_eq!(scanned.lift(), 8);
        assert_eq!(five.inverse().unwrap(), scanned);
        assert!(matches!(p13.zero().inverse(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn inverse_exhaustive_small_primes() {
        for p in (3..=101).filter(|&n| is_prime(n)) {
            let f = m(p);
            for a in f.elements().skip(1) {
                assert_eq!((a * a.inverse().unwrap()).lift(), 1, "p={p} a={a}");
            }
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(m(5).element(4).legendre(), 1);
        assert_eq!(m(5).element(0).legendre(), 0);
        assert_eq!(m(7).element(3).legendre(), -1);
    }

    #[test]
    fn legendre_matches_enumerated_squares() {
        for p in (3..=101).filter(|&n| is_prime(n)) {
            let f = m(p);
            let squares: std::collections::HashSet<u32> =
                f.elements().skip(1).map(|x| (x * x).lift()).collect();
            let mut plus = 0;
            let mut minus = 0;
            for a in f.elements() {
                let expected = if a.is_zero() {
                    0
                } else if squares.contains(&a.lift()) {
                    1
                } else {
                    -1
                };
                assert_eq!(a.legendre(), expected, "p={p} a={a}");
                match a.legendre() {
                    1 => plus += 1,
                    -1 => minus += 1,
                    _ => {}
                }
            }
            assert_eq!(plus, (p - 1) / 2);
            assert_eq!(minus, (p - 1) / 2);
        }
    }

    #[test]
    fn lift_is_canonical() {
        let p5 = m(5);
        assert_eq!(p5.element(0).lift(), 0);
        assert_eq!(p5.element(4).lift(), 4);
        let p7 = m(7);
        assert_eq!((p7.element(3) + p7.element(5)).lift(), 1);
        assert_eq!(p7.element_i64(-1).lift(), 6);
        let lifts: Vec<u32> = p7.elements().map(FieldElement::lift).collect();
        assert_eq!(lifts, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn large_prime_stays_exact() {
        let p = m(2_147_483_647);
        let a = p.element(2_147_483_646);
        assert_eq!((a * a).lift(), 1);
        assert_eq!((a + a).lift(), 2_147_483_645);
        assert_eq!((a * a.inverse().unwrap()).lift(), 1);
    }
}
