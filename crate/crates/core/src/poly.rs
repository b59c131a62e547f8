//! Polynomial functions F_p -> F_p.
//!
//! Every function on F_p agrees with exactly one polynomial of degree at most
//! `p - 1`; [`Polynomial`] always stores that representative as a dense
//! coefficient vector of length `p`.

use std::fmt;

use crate::error::{Error, Result};
use crate::fp::{FieldElement, PrimeModulus};

/// The `p` values of a function on F_p, index `i` holding the value at `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ValueTable {
    modulus: PrimeModulus,
    values: Vec<u32>,
}

impl ValueTable {
    /// Build from raw integers; each entry is reduced mod p.
    pub fn new(modulus: PrimeModulus, values: &[u64]) -> Result<Self> {
        if values.len() != modulus.order() {
            return Err(Error::WrongLength {
                expected: modulus.order(),
                actual: values.len(),
            });
        }
        Ok(ValueTable {
            modulus,
            values: values.iter().map(|&v| modulus.element(v).lift()).collect(),
        })
    }

    pub fn from_elements(modulus: PrimeModulus, values: &[FieldElement]) -> Result<Self> {
        if values.len() != modulus.order() {
            return Err(Error::WrongLength {
                expected: modulus.order(),
                actual: values.len(),
            });
        }
        let mut raw = Vec::with_capacity(values.len());
        for v in values {
            if v.modulus() != modulus {
                return Err(Error::ModulusMismatch {
                    left: modulus.get(),
                    right: v.modulus().get(),
                });
            }
            raw.push(v.lift());
        }
        Ok(ValueTable {
            modulus,
            values: raw,
        })
    }

    /// Caller guarantees `values.len() == p` and every entry `< p`.
    pub(crate) fn from_raw(modulus: PrimeModulus, values: Vec<u32>) -> Self {
        debug_assert_eq!(values.len(), modulus.order());
        debug_assert!(values.iter().all(|&v| v < modulus.get()));
        ValueTable { modulus, values }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn raw(&self) -> &[u32] {
        &self.values
    }

    pub fn get(&self, i: usize) -> FieldElement {
        self.modulus.element(self.values[i] as u64)
    }

    pub fn lifted_sum(&self) -> u64 {
        self.values.iter().map(|&v| v as u64).sum()
    }
}

/// The reduced representative of a polynomial function on F_p.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    modulus: PrimeModulus,
    coeffs: Vec<u32>,
}

impl Polynomial {
    pub fn zero(modulus: PrimeModulus) -> Self {
        Polynomial {
            modulus,
            coeffs: vec![0; modulus.order()],
        }
    }

    pub fn constant(modulus: PrimeModulus, c: u64) -> Self {
        let mut g = Self::zero(modulus);
        g.coeffs[0] = modulus.element(c).lift();
        g
    }

    /// `x^e` for any exponent, reduced modulo `x^p - x`.
    pub fn monomial(modulus: PrimeModulus, e: u64) -> Self {
        let mut coeffs = vec![0u64; (reduce_exponent(modulus, e) + 1) as usize];
        *coeffs.last_mut().unwrap() = 1;
        Self::from_coeffs(modulus, &coeffs)
    }

    /// Build from low-to-high coefficients of any length. Exponents `>= p`
    /// fold back using `x^p = x` on F_p.
    pub fn from_coeffs(modulus: PrimeModulus, coeffs: &[u64]) -> Self {
        let mut out = vec![0u32; modulus.order()];
        for (e, &c) in coeffs.iter().enumerate() {
            let slot = reduce_exponent(modulus, e as u64) as usize;
            out[slot] = modulus.add_raw(out[slot], modulus.element(c).lift());
        }
        Polynomial {
            modulus,
            coeffs: out,
        }
    }

    pub fn from_signed_coeffs(modulus: PrimeModulus, coeffs: &[i64]) -> Self {
        let lifted: Vec<u64> = coeffs
            .iter()
            .map(|&c| modulus.element_i64(c).lift() as u64)
            .collect();
        Self::from_coeffs(modulus, &lifted)
    }

    pub(crate) fn from_raw(modulus: PrimeModulus, coeffs: Vec<u32>) -> Self {
        debug_assert_eq!(coeffs.len(), modulus.order());
        Polynomial { modulus, coeffs }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    /// All `p` coefficients, index `i` being the coefficient of `x^i`.
    pub fn coefficients(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn coefficient(&self, i: usize) -> FieldElement {
        self.modulus.element(self.coeffs[i] as u64)
    }

    /// Coefficients with trailing zeros removed; empty for the zero polynomial.
    pub fn trimmed(&self) -> &[u32] {
        match self.degree() {
            Some(d) => &self.coeffs[..=d],
            None => &[],
        }
    }

    /// Largest index with a nonzero coefficient, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0)
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    /// Constant as a function, including the zero polynomial.
    pub fn is_constant(&self) -> bool {
        self.degree().is_none_or(|d| d == 0)
    }

    pub fn evaluate(&self, x: FieldElement) -> Result<FieldElement> {
        if x.modulus() != self.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.get(),
                right: x.modulus().get(),
            });
        }
        Ok(self.modulus.element(self.eval_raw(x.lift()) as u64))
    }

    #[inline]
    pub fn eval_raw(&self, x: u32) -> u32 {
        let m = self.modulus;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| m.add_raw(m.mul_raw(acc, x), c))
    }

    pub fn values(&self) -> ValueTable {
        let values = (0..self.modulus.get()).map(|x| self.eval_raw(x)).collect();
        ValueTable::from_raw(self.modulus, values)
    }

    /// The unique polynomial of degree `<= p - 1` through `(i, v[i])`.
    ///
    /// Uses the Lagrange basis over the whole field,
    /// `L_a(x) = 1 - (x - a)^(p-1)`, whose expansion gives
    /// `c_0 = v(0)` and `c_k = -sum_a v(a) a^(p-1-k)` for `k >= 1`.
    pub fn interpolate(table: &ValueTable) -> Polynomial {
        let m = table.modulus;
        let p = m.order();
        let v = &table.values;
        // power_sums[j] = sum_a v(a) * a^j, with 0^0 = 1
        let mut power_sums = vec![0u32; p];
        power_sums[0] = v[0];
        for a in 1..p {
            let va = v[a];
            if va == 0 {
                continue;
            }
            let mut pw = 1u32;
            for slot in power_sums.iter_mut() {
                *slot = m.add_raw(*slot, m.mul_raw(va, pw));
                pw = m.mul_raw(pw, a as u32);
            }
        }
        let mut coeffs = vec![0u32; p];
        coeffs[0] = v[0];
        for k in 1..p {
            coeffs[k] = m.neg_raw(power_sums[p - 1 - k]);
        }
        Polynomial { modulus: m, coeffs }
    }

    /// Sum of the lifted values, as an exact integer in `[0, p(p-1)]`.
    pub fn lifted_value_sum(&self) -> u64 {
        (0..self.modulus.get())
            .map(|x| self.eval_raw(x) as u64)
            .sum()
    }

    /// True iff the values sum to 0 in F_p, which happens exactly when the
    /// degree is below `p - 1`.
    pub fn sum_criterion(&self) -> bool {
        let m = self.modulus;
        (0..m.get()).fold(0, |acc, x| m.add_raw(acc, self.eval_raw(x))) == 0
    }

    /// Reduced representative of `x -> g(x^2)`.
    pub fn compose_square(&self) -> Polynomial {
        let m = self.modulus;
        let values = (0..m.get())
            .map(|x| self.eval_raw(m.mul_raw(x, x)))
            .collect();
        Self::interpolate(&ValueTable::from_raw(m, values))
    }

    /// Reduced representative of `x -> g(a x + b)`, `a != 0`.
    pub fn substitute_affine(&self, a: FieldElement, b: FieldElement) -> Result<Polynomial> {
        for e in [a, b] {
            if e.modulus() != self.modulus {
                return Err(Error::ModulusMismatch {
                    left: self.modulus.get(),
                    right: e.modulus().get(),
                });
            }
        }
        if a.is_zero() {
            return Err(Error::ZeroScale);
        }
        Ok(self.substitute_raw(a.lift(), b.lift()))
    }

    pub(crate) fn substitute_raw(&self, a: u32, b: u32) -> Polynomial {
        let m = self.modulus;
        let values = (0..m.get())
            .map(|x| self.eval_raw(m.add_raw(m.mul_raw(a, x), b)))
            .collect();
        Self::interpolate(&ValueTable::from_raw(m, values))
    }

    /// `|{x : g(x) = c}|`.
    pub fn value_multiplicity(&self, c: FieldElement) -> usize {
        let c = c.lift();
        (0..self.modulus.get())
            .filter(|&x| self.eval_raw(x) == c)
            .count()
    }
}

/// Exponent `e` reduced under `x^p = x`: 0 stays 0, otherwise into `1..=p-1`.
fn reduce_exponent(modulus: PrimeModulus, e: u64) -> u64 {
    let p = modulus.get() as u64;
    if e < p {
        e
    } else {
        (e - 1) % (p - 1) + 1
    }
}

impl PartialOrd for Polynomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on `(p, c_0, c_1, ..., c_{p-1})`.
impl Ord for Polynomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.modulus
            .cmp(&other.modulus)
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

/// Coefficient list, low to high: `[1,0,1]` is `x^2 + 1`, `[0]` the zero polynomial.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.trimmed();
        if t.is_empty() {
            return write!(f, "[0]");
        }
        write!(f, "[")?;
        for (i, c) in t.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl Polynomial {
    /// Conventional notation, highest power first, e.g. `x^2 + 1`.
    pub fn to_algebraic(&self) -> String {
        let mut terms = Vec::new();
        for (e, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let coef = if c == 1 && e > 0 {
                String::new()
            } else {
                c.to_string()
            };
            terms.push(match e {
                0 => coef,
                1 => format!("{coef}x"),
                _ => format!("{coef}x^{e}"),
            });
        }
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

/// Precomputed `a^j` for all `a, j < p`, for repeated degree queries on
/// value tables without building the full coefficient vector.
#[derive(Clone, Debug)]
pub struct PowerTable {
    modulus: PrimeModulus,
    powers: Vec<u32>,
}

impl PowerTable {
    pub fn new(modulus: PrimeModulus) -> Self {
        let p = modulus.order();
        let mut powers = vec![0u32; p * p];
        for a in 0..p {
            let mut pw = 1u32;
            for j in 0..p {
                powers[a * p + j] = pw;
                pw = modulus.mul_raw(pw, a as u32);
            }
        }
        PowerTable { modulus, powers }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    /// Whether the interpolating polynomial of `values` has a nonzero
    /// coefficient at some degree `>= min_degree`.
    pub fn has_degree_at_least(&self, values: &[u32], min_degree: usize) -> bool {
        let p = self.modulus.order();
        let pm = self.modulus.get() as u64;
        if min_degree == 0 {
            return values.iter().any(|&v| !(v as u64).is_multiple_of(pm));
        }
        (min_degree..p).rev().any(|k| {
            let j = p - 1 - k;
            let acc: u64 = values
                .iter()
                .enumerate()
                .map(|(a, &v)| (v as u64 % pm) * self.powers[a * p + j] as u64)
                .sum();
            !acc.is_multiple_of(pm)
        })
    }

    /// Degree of the interpolating polynomial of `values` (integers, reduced
    /// mod p here). Scans coefficients from the top and stops at the first
    /// nonzero one.
    pub fn degree_of_values(&self, values: &[u32]) -> Option<usize> {
        let m = self.modulus;
        let p = m.order();
        debug_assert_eq!(values.len(), p);
        let pm = m.get();
        for k in (1..p).rev() {
            let j = p - 1 - k;
            let mut acc: u64 = 0;
            for (a, &v) in values.iter().enumerate() {
                let v = v % pm;
                if v != 0 {
                    acc += v as u64 * self.powers[a * p + j] as u64;
                }
            }
            if !acc.is_multiple_of(pm as u64) {
                return Some(k);
            }
        }
        if !values[0].is_multiple_of(pm) {
            Some(0)
        } else {
            None
        }
    }
}
