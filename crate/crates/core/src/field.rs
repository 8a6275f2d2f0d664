//! Prime-field arithmetic, symbol vectors, and small dense linear solves.
//!
//! Every message, query and answer symbol in the simulator is a
//! [`FieldElement`] of some prime field `F_q`. The modulus travels with the
//! element so that mixing two fields is caught at the operation that does it.
//! Moduli are restricted to primes below `2^61`, which keeps every product
//! inside a `u128` intermediate.

use std::fmt;
use std::ops::{Add, AddAssign, Deref, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Rate;

/// Exclusive upper bound on supported moduli.
pub const MAX_MODULUS: u64 = 1 << 61;

/// The alphabet `F_q` for a prime `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct FieldSpec {
    q: u64,
}

impl FieldSpec {
    pub fn new(q: u64) -> Result<Self> {
        if !(2..MAX_MODULUS).contains(&q) || !is_prime(q) {
            return Err(Error::InvalidModulus(q));
        }
        Ok(Self { q })
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Embeds an integer, reducing it modulo `q`.
    #[inline]
    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.q,
            q: self.q,
        }
    }

    /// Embeds a signed integer, reducing it into `[0, q)`.
    pub fn element_signed(&self, value: i64) -> FieldElement {
        let r = value.rem_euclid(self.q as i64);
        self.element(r as u64)
    }

    #[inline]
    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    #[inline]
    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// Information-theoretic width of one symbol, `ceil(log2 q)`.
    pub fn symbol_bits(&self) -> u32 {
        64 - (self.q - 1).leading_zeros()
    }

    /// All elements `0, 1, ..., q-1` in order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(move |v| self.element(v))
    }

    pub fn vector(&self, values: &[u64]) -> SymbolVector {
        SymbolVector::from_elements(*self, values.iter().map(|&v| self.element(v)).collect())
            .expect("elements built from one spec")
    }

    pub fn zeros(&self, len: usize) -> SymbolVector {
        SymbolVector::from_elements(*self, vec![self.zero(); len]).expect("uniform spec")
    }

    /// Unit vector `e_index` (0-based) of length `len`.
    pub fn unit(&self, len: usize, index: usize) -> SymbolVector {
        let mut v = self.zeros(len);
        v.elements[index] = self.one();
        v
    }
}

impl TryFrom<u64> for FieldSpec {
    type Error = Error;

    fn try_from(q: u64) -> Result<Self> {
        Self::new(q)
    }
}

impl From<FieldSpec> for u64 {
    fn from(spec: FieldSpec) -> u64 {
        spec.q
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

/// Deterministic Miller-Rabin; the witness set is exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// A value in `[0, q)` tagged with its modulus.
///
/// The `std::ops` impls panic when the moduli differ; the `try_*` methods
/// report [`Error::MismatchedField`] instead.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u64,
    q: u64,
}

impl FieldElement {
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec { q: self.q }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.q == other.q {
            Ok(())
        } else {
            Err(Error::MismatchedField {
                left: self.q,
                right: other.q,
            })
        }
    }

    pub fn try_add(self, other: Self) -> Result<Self> {
        self.check(&other)?;
        let s = self.value + other.value;
        Ok(Self {
            value: if s >= self.q { s - self.q } else { s },
            q: self.q,
        })
    }

    pub fn try_sub(self, other: Self) -> Result<Self> {
        self.check(&other)?;
        let value = if self.value >= other.value {
            self.value - other.value
        } else {
            self.q - (other.value - self.value)
        };
        Ok(Self { value, q: self.q })
    }

    pub fn try_mul(self, other: Self) -> Result<Self> {
        self.check(&other)?;
        Ok(Self {
            value: mul_mod(self.value, other.value, self.q),
            q: self.q,
        })
    }

    pub fn pow(self, exp: u64) -> Self {
        Self {
            value: pow_mod(self.value, exp, self.q),
            q: self.q,
        }
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(self) -> Result<Self> {
        if self.value == 0 {
            return Err(Error::NonInvertible);
        }
        Ok(self.pow(self.q - 2))
    }

    pub fn try_div(self, other: Self) -> Result<Self> {
        self.check(&other)?;
        self.try_mul(other.inv()?)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(mod {})", self.value, self.q)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.try_add(rhs).expect("field mismatch in add")
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(rhs).expect("field mismatch in sub")
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(rhs).expect("field mismatch in mul")
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            value: if self.value == 0 { 0 } else { self.q - self.value },
            q: self.q,
        }
    }
}

impl AddAssign for FieldElement {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for FieldElement {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

/// An ordered list of symbols over one field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymbolVector {
    spec: FieldSpec,
    elements: Vec<FieldElement>,
}

impl SymbolVector {
    pub fn from_elements(spec: FieldSpec, elements: Vec<FieldElement>) -> Result<Self> {
        if let Some(bad) = elements.iter().find(|e| e.q != spec.q) {
            return Err(Error::MismatchedField {
                left: spec.q,
                right: bad.q,
            });
        }
        Ok(Self { spec, elements })
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn into_inner(self) -> Vec<FieldElement> {
        self.elements
    }

    pub fn as_mut_slice(&mut self) -> &mut [FieldElement] {
        &mut self.elements
    }

    pub fn values(&self) -> Vec<u64> {
        self.elements.iter().map(|e| e.value).collect()
    }

    pub fn dot(&self, other: &[FieldElement]) -> Result<FieldElement> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        dot(self.spec, &self.elements, other)
    }

    pub fn try_add(&self, other: &SymbolVector) -> Result<SymbolVector> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        let elements = self
            .elements
            .iter()
            .zip(&other.elements)
            .map(|(a, b)| a.try_add(*b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: self.spec,
            elements,
        })
    }

    pub fn scale(&self, c: FieldElement) -> SymbolVector {
        Self {
            spec: self.spec,
            elements: self.elements.iter().map(|&e| e * c).collect(),
        }
    }
}

impl Deref for SymbolVector {
    type Target = [FieldElement];
    fn deref(&self) -> &[FieldElement] {
        &self.elements
    }
}

impl fmt::Debug for SymbolVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} over {}", self.values(), self.spec)
    }
}

/// Inner product of two equal-length slices over `spec`.
pub fn dot(spec: FieldSpec, a: &[FieldElement], b: &[FieldElement]) -> Result<FieldElement> {
    a.iter()
        .zip(b)
        .try_fold(spec.zero(), |acc, (x, y)| acc.try_add(x.try_mul(*y)?))
}

/// Scalars that support exact Gaussian elimination.
///
/// Implemented for [`FieldElement`] and for the exact rationals used by the
/// rate calculators. There is no floating-point impl: pivoting on the
/// first nonzero entry is only sound when zero tests are exact.
pub trait ExactScalar: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn is_zero_value(&self) -> bool;
    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn inverse(&self) -> Option<Self>;
}

impl ExactScalar for FieldElement {
    fn zero_like(&self) -> Self {
        self.spec().zero()
    }
    fn is_zero_value(&self) -> bool {
        self.value == 0
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        *self + *rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        *self - *rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        *self * *rhs
    }
    fn inverse(&self) -> Option<Self> {
        self.inv().ok()
    }
}

impl ExactScalar for Rate {
    fn zero_like(&self) -> Self {
        Rate::zero()
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn inverse(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(Rate::one() / self)
        }
    }
}

/// Solves `A x = b` for square `A` by Gaussian elimination with
/// first-nonzero pivoting.
pub fn solve_linear<T: ExactScalar>(a: &[Vec<T>], b: &[T]) -> Result<Vec<T>> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if let Some(row) = a.iter().find(|row| row.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            cols: row.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // augmented rows [A | b]
    let mut m: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero_value())
            .ok_or(Error::SingularMatrix)?;
        m.swap(col, pivot);
        let inv = m[col][col].inverse().ok_or(Error::SingularMatrix)?;
        for c in col..=n {
            m[col][c] = m[col][c].mul_ref(&inv);
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero_value() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..=n {
                let delta = factor.mul_ref(&m[col][c]);
                m[r][c] = m[r][c].sub_ref(&delta);
            }
        }
    }
    Ok(m.into_iter().map(|mut row| row.pop().expect("augmented")).collect())
}

/// Square matrix-vector product over a field.
pub fn mat_vec(spec: FieldSpec, a: &[Vec<FieldElement>], x: &[FieldElement]) -> Vec<FieldElement> {
    a.iter()
        .map(|row| dot(spec, row, x).expect("same field"))
        .collect()
}
