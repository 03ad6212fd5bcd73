//! Arithmetic in GF(p^m) in the polynomial basis.
//!
//! A [`FieldSpec`] is a prime `p`, a degree `m` and a monic irreducible
//! polynomial of degree `m` over Z_p. Elements are coefficient vectors of
//! length `m` (constant term first). Every element carries its field, and
//! arithmetic between elements of different fields is rejected.
//!
//! Besides the field operations this module provides the pieces the code
//! constructions are assembled from: subfield enumeration, multiplicative
//! coset representatives, concatenation of coordinate vectors across fields,
//! w-independence checks and BCH-shaped independent sets.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GaloisError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("field degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{m} does not fit in 64 bits")]
    TooLarge { p: u32, m: u32 },
    #[error("modulus must be monic of degree {expected}")]
    BadModulus { expected: u32 },
    #[error("modulus is reducible over Z_{0}")]
    Reducible(u32),
    #[error("coefficient {coeff} out of range for characteristic {p}")]
    CoefficientOutOfRange { coeff: u32, p: u32 },
    #[error("expected {expected} coefficients, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("element index {index} out of range for field of order {order}")]
    IndexOutOfRange { index: u64, order: u64 },
    #[error("operands belong to different fields: {left} vs {right}")]
    FieldMismatch { left: String, right: String },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("subfield degree {d} does not divide field degree {m}")]
    NotDivisor { d: u32, m: u32 },
    #[error("requested {requested} coset representatives but only {available} cosets exist")]
    TooManyCosets { requested: usize, available: u64 },
    #[error("characteristic mismatch: {0} vs {1}")]
    CharacteristicMismatch(u32, u32),
    #[error("degree mismatch: blocks total {blocks}, target has degree {target}")]
    DegreeMismatch { blocks: u32, target: u32 },
    #[error("w-independence is only defined in characteristic 2 (got {0})")]
    NotCharacteristicTwo(u32),
    #[error("bound w = {w} must be positive (set of {len})")]
    BadBound { w: usize, len: usize },
    #[error("set contains duplicate elements at positions {0} and {1}")]
    Duplicate(usize, usize),
    #[error("no root of the modulus of {0} exists in {1}")]
    NoEmbedding(String, String),
}

pub type Result<T> = std::result::Result<T, GaloisError>;

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

// ---------------------------------------------------------------------------
// Polynomials over Z_p (coefficient vectors, constant term first)
// ---------------------------------------------------------------------------

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    // p is prime and small; Fermat.
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

/// Remainder of `a` modulo `b` over Z_p. `b` must be nonzero.
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let mut b = b.to_vec();
    poly_trim(&mut b);
    let db = b.len() - 1;
    let lead_inv = inv_mod_p(b[db], p) as u64;
    while r.len() > db {
        let top = r.len() - 1;
        let factor = r[top] as u64 * lead_inv % p as u64;
        if factor != 0 {
            let shift = top - db;
            for (i, &bi) in b.iter().enumerate() {
                let sub = factor * bi as u64 % p as u64;
                r[shift + i] = ((r[shift + i] as u64 + p as u64 - sub) % p as u64) as u32;
            }
        }
        poly_trim(&mut r);
    }
    r
}

fn digits(mut index: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0u32; len];
    for c in out.iter_mut() {
        *c = (index % p as u64) as u32;
        index /= p as u64;
    }
    out
}

fn checked_order(p: u32, m: u32) -> Result<u64> {
    (p as u64)
        .checked_pow(m)
        .ok_or(GaloisError::TooLarge { p, m })
}

fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let m = poly.len() - 1;
    if m == 1 {
        return true;
    }
    // Trial division by every monic polynomial of degree 1..=m/2.
    for d in 1..=m / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut divisor = digits(idx, p, d);
            divisor.push(1);
            if poly_rem(poly, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest monic irreducible polynomial of degree `m`
/// over Z_p with nonzero constant term.
///
/// Candidates are scanned by increasing integer value of their lower
/// coefficients read as base-`p` digits (constant term least significant).
pub fn find_irreducible(p: u32, m: u32) -> Result<Vec<u32>> {
    if !is_prime(p) {
        return Err(GaloisError::NotPrime(p));
    }
    if m == 0 {
        return Err(GaloisError::ZeroDegree);
    }
    let count = checked_order(p, m)?;
    for idx in 0..count {
        let mut poly = digits(idx, p, m as usize);
        if poly[0] == 0 {
            continue;
        }
        poly.push(1);
        if is_irreducible(&poly, p) {
            return Ok(poly);
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

// ---------------------------------------------------------------------------
// Field specification
// ---------------------------------------------------------------------------

/// Largest degree handled; elements are packed into a `u64`.
const MAX_DEGREE: usize = 63;

#[derive(Debug, PartialEq, Eq, Hash)]
struct FieldInner {
    p: u32,
    m: u32,
    modulus: Vec<u32>,
    order: u64,
    /// Characteristic 2 only: low `m` coefficients of the modulus as bits.
    low_bits: u64,
}

/// GF(p^m) defined by a monic irreducible polynomial. Cheap to clone.
#[derive(Clone)]
pub struct FieldSpec(Arc<FieldInner>);

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}; {:?})", self.0.p, self.0.m, self.0.modulus)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.0.p, self.0.m)
    }
}

impl FieldSpec {
    /// Builds a field from an explicit modulus, checking irreducibility.
    pub fn new(p: u32, m: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(GaloisError::NotPrime(p));
        }
        if m == 0 {
            return Err(GaloisError::ZeroDegree);
        }
        let order = checked_order(p, m)?;
        if m as usize > MAX_DEGREE || order > 1 << 63 {
            return Err(GaloisError::TooLarge { p, m });
        }
        if modulus.len() != m as usize + 1 || modulus[m as usize] != 1 {
            return Err(GaloisError::BadModulus { expected: m });
        }
        if let Some(&c) = modulus.iter().find(|&&c| c >= p) {
            return Err(GaloisError::CoefficientOutOfRange { coeff: c, p });
        }
        if !is_irreducible(&modulus, p) {
            return Err(GaloisError::Reducible(p));
        }
        let low_bits = if p == 2 {
            modulus[..m as usize]
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &c)| acc | (c as u64) << i)
        } else {
            0
        };
        Ok(FieldSpec(Arc::new(FieldInner {
            p,
            m,
            modulus,
            order,
            low_bits,
        })))
    }

    /// GF(p^m) with the modulus chosen by [`find_irreducible`].
    pub fn standard(p: u32, m: u32) -> Result<Self> {
        if m as usize > MAX_DEGREE || checked_order(p, m)? > 1 << 63 {
            return Err(GaloisError::TooLarge { p, m });
        }
        let modulus = find_irreducible(p, m)?;
        Self::new(p, m, modulus)
    }

    /// GF(2^m) with the standard modulus.
    pub fn binary(m: u32) -> Result<Self> {
        Self::standard(2, m)
    }

    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    pub fn degree(&self) -> u32 {
        self.0.m
    }

    /// Monic modulus, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn order(&self) -> u64 {
        self.0.order
    }

    fn wrap(&self, value: u64) -> FieldElement {
        FieldElement {
            field: self.clone(),
            value,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.wrap(0)
    }

    pub fn one(&self) -> FieldElement {
        self.wrap(1)
    }

    /// The image of an integer under Z -> Z_p -> GF(p^m).
    pub fn from_int(&self, value: u64) -> FieldElement {
        self.wrap(value % self.0.p as u64)
    }

    /// The class of the indeterminate `x`. For `m = 1` this is the root of
    /// the linear modulus, i.e. `-modulus[0]`.
    pub fn generator(&self) -> FieldElement {
        if self.0.m == 1 {
            let p = self.0.p;
            return self.from_int(((p - self.0.modulus[0]) % p) as u64);
        }
        self.wrap(self.0.p as u64)
    }

    pub fn element(&self, coeffs: Vec<u32>) -> Result<FieldElement> {
        if coeffs.len() != self.0.m as usize {
            return Err(GaloisError::WrongLength {
                expected: self.0.m as usize,
                got: coeffs.len(),
            });
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c >= self.0.p) {
            return Err(GaloisError::CoefficientOutOfRange {
                coeff: c,
                p: self.0.p,
            });
        }
        Ok(self.wrap(self.pack(&coeffs)))
    }

    /// Element whose coefficients are the base-`p` digits of `index`,
    /// constant term least significant.
    pub fn from_index(&self, index: u64) -> Result<FieldElement> {
        if index >= self.0.order {
            return Err(GaloisError::IndexOutOfRange {
                index,
                order: self.0.order,
            });
        }
        Ok(self.wrap(index))
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.0.order).map(move |i| self.wrap(i))
    }

    fn ensure_same(&self, other: &FieldSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(GaloisError::FieldMismatch {
                left: format!("{self:?}"),
                right: format!("{other:?}"),
            })
        }
    }

    fn unpack(&self, mut value: u64, out: &mut [u32; MAX_DEGREE]) {
        let p = self.0.p as u64;
        for c in out.iter_mut().take(self.0.m as usize) {
            *c = (value % p) as u32;
            value /= p;
        }
    }

    fn pack(&self, coeffs: &[u32]) -> u64 {
        let p = self.0.p as u64;
        coeffs.iter().rev().fold(0u64, |acc, &c| acc * p + c as u64)
    }

    fn add_values(&self, a: u64, b: u64) -> u64 {
        if self.0.p == 2 {
            return a ^ b;
        }
        let m = self.0.m as usize;
        let (mut x, mut y) = ([0u32; MAX_DEGREE], [0u32; MAX_DEGREE]);
        self.unpack(a, &mut x);
        self.unpack(b, &mut y);
        for i in 0..m {
            x[i] = (x[i] + y[i]) % self.0.p;
        }
        self.pack(&x[..m])
    }

    fn neg_value(&self, a: u64) -> u64 {
        if self.0.p == 2 {
            return a;
        }
        let m = self.0.m as usize;
        let mut x = [0u32; MAX_DEGREE];
        self.unpack(a, &mut x);
        for c in x.iter_mut().take(m) {
            *c = (self.0.p - *c) % self.0.p;
        }
        self.pack(&x[..m])
    }

    fn mul_values(&self, a: u64, b: u64) -> u64 {
        let m = self.0.m as usize;
        if self.0.p == 2 {
            // Shift-and-add with reduction by the modulus.
            let top = 1u64 << (m - 1);
            let mask = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
            let (mut a, mut b, mut acc) = (a, b, 0u64);
            while b != 0 {
                if b & 1 == 1 {
                    acc ^= a;
                }
                b >>= 1;
                let carry = a & top != 0;
                a = (a << 1) & mask;
                if carry {
                    a ^= self.0.low_bits;
                }
            }
            return acc;
        }
        let p = self.0.p as u64;
        let (mut x, mut y) = ([0u32; MAX_DEGREE], [0u32; MAX_DEGREE]);
        self.unpack(a, &mut x);
        self.unpack(b, &mut y);
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..m {
            if x[i] == 0 {
                continue;
            }
            for j in 0..m {
                prod[i + j] = (prod[i + j] + x[i] as u64 * y[j] as u64) % p;
            }
        }
        // x^m = -(modulus[0] + ... + modulus[m-1] x^{m-1})
        let modulus = &self.0.modulus;
        for top in (m..2 * m - 1).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for (k, &mk) in modulus[..m].iter().enumerate() {
                let idx = top - m + k;
                prod[idx] = (prod[idx] + (p - c) * mk as u64) % p;
            }
        }
        let mut out = [0u32; MAX_DEGREE];
        for i in 0..m {
            out[i] = prod[i] as u32;
        }
        self.pack(&out[..m])
    }
}

// ---------------------------------------------------------------------------
// Elements
// ---------------------------------------------------------------------------

/// An element of a [`FieldSpec`]. Stored as its index (coefficients read
/// as base-`p` digits); [`FieldElement::coeffs`] gives the vector form.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: FieldSpec,
    value: u64,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}@{}", self.coeffs(), self.field)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs().iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let coeff = if c == 1 && i > 0 {
                String::new()
            } else {
                c.to_string()
            };
            terms.push(match i {
                0 => coeff,
                1 => format!("{coeff}x"),
                _ => format!("{coeff}x^{i}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl std::hash::Hash for FieldElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.value.hash(state);
    }
}

impl FieldElement {
    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    /// Coordinate vector, constant term first.
    pub fn coeffs(&self) -> Vec<u32> {
        let mut out = [0u32; MAX_DEGREE];
        self.field.unpack(self.value, &mut out);
        out[..self.field.0.m as usize].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn is_one(&self) -> bool {
        self.value == 1
    }

    /// Inverse of [`FieldSpec::from_index`].
    pub fn index(&self) -> u64 {
        self.value
    }

    /// Coordinates packed into an integer, one bit per coefficient. Only
    /// meaningful in characteristic 2, where it coincides with [`Self::index`].
    pub fn bits(&self) -> u64 {
        self.value
    }

    pub fn try_add(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.field.ensure_same(&rhs.field)?;
        Ok(self.add_unchecked(rhs))
    }

    pub fn try_sub(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.field.ensure_same(&rhs.field)?;
        Ok(self.add_unchecked(&rhs.neg_unchecked()))
    }

    pub fn try_mul(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.field.ensure_same(&rhs.field)?;
        Ok(self.mul_unchecked(rhs))
    }

    fn add_unchecked(&self, rhs: &FieldElement) -> FieldElement {
        self.field
            .wrap(self.field.add_values(self.value, rhs.value))
    }

    fn neg_unchecked(&self) -> FieldElement {
        self.field.wrap(self.field.neg_value(self.value))
    }

    fn mul_unchecked(&self, rhs: &FieldElement) -> FieldElement {
        self.field
            .wrap(self.field.mul_values(self.value, rhs.value))
    }

    /// Multiplication by an integer (repeated addition).
    pub fn scale(&self, k: u64) -> FieldElement {
        self.mul_unchecked(&self.field.from_int(k))
    }

    /// Square-and-multiply exponentiation.
    pub fn pow(&self, mut exponent: u64) -> FieldElement {
        let f = &self.field;
        let mut result = 1u64;
        let mut base = self.value;
        while exponent > 0 {
            if exponent & 1 == 1 {
                result = f.mul_values(result, base);
            }
            exponent >>= 1;
            if exponent > 0 {
                base = f.mul_values(base, base);
            }
        }
        f.wrap(result)
    }

    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(GaloisError::ZeroInverse);
        }
        Ok(self.pow(self.field.0.order - 2))
    }

    pub fn try_div(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.field.ensure_same(&rhs.field)?;
        Ok(self.mul_unchecked(&rhs.inv()?))
    }

    /// `self^(p^iterations)`.
    pub fn frobenius(&self, iterations: u32) -> FieldElement {
        let p = self.field.0.p as u64;
        // The map has order m.
        let iterations = iterations % self.field.0.m;
        let mut out = self.clone();
        for _ in 0..iterations {
            out = out.pow(p);
        }
        out
    }

    /// Evaluates a polynomial with coefficients in Z_p at this element.
    pub fn eval_prime_poly(&self, poly: &[u32]) -> FieldElement {
        let mut acc = self.field.zero();
        for &c in poly.iter().rev() {
            acc = acc
                .mul_unchecked(self)
                .add_unchecked(&self.field.from_int(c as u64));
        }
        acc
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.neg_unchecked()
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.neg_unchecked()
    }
}

// ---------------------------------------------------------------------------
// Subfields and cosets
// ---------------------------------------------------------------------------

/// The subfield of size `p^d` inside a parent field, as a list of parent
/// elements in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubfieldView {
    parent: FieldSpec,
    degree: u32,
    elements: Vec<FieldElement>,
}

impl SubfieldView {
    pub fn parent(&self) -> &FieldSpec {
        &self.parent
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Frobenius fixed-point membership test.
    pub fn contains(&self, e: &FieldElement) -> bool {
        e.field() == &self.parent && &e.frobenius(self.degree) == e
    }
}

/// Elements `e` of `spec` with `e^(p^d) = e`.
pub fn subfield_elements(spec: &FieldSpec, d: u32) -> Result<SubfieldView> {
    if d == 0 || !spec.degree().is_multiple_of(d) {
        return Err(GaloisError::NotDivisor {
            d,
            m: spec.degree(),
        });
    }
    let elements = spec.elements().filter(|e| &e.frobenius(d) == e).collect();
    Ok(SubfieldView {
        parent: spec.clone(),
        degree: d,
        elements,
    })
}

/// Nonzero `a_1..a_count` with `a_i / a_j` outside `sub` for `i != j`, so
/// that the sets `a_i * sub` meet only in zero.
///
/// Greedy scan of nonzero elements in index order; the first pick is 1.
pub fn mult_coset_reps(
    spec: &FieldSpec,
    sub: &SubfieldView,
    count: usize,
) -> Result<Vec<FieldElement>> {
    spec.ensure_same(sub.parent())?;
    let available = (spec.order() - 1) / (sub.len() as u64 - 1);
    if count as u64 > available {
        return Err(GaloisError::TooManyCosets {
            requested: count,
            available,
        });
    }
    let mut reps: Vec<FieldElement> = Vec::with_capacity(count);
    for candidate in spec.elements().skip(1) {
        if reps.len() == count {
            break;
        }
        let fresh = reps.iter().all(|r| {
            let quotient = candidate.try_div(r).expect("nonzero representative");
            !sub.contains(&quotient)
        });
        if fresh {
            reps.push(candidate);
        }
    }
    Ok(reps)
}

// ---------------------------------------------------------------------------
// Concatenation and independent sets
// ---------------------------------------------------------------------------

/// Concatenates coordinate vectors of the blocks (in order) and reads the
/// result as a coordinate vector of `target`.
pub fn concat_elements(blocks: &[FieldElement], target: &FieldSpec) -> Result<FieldElement> {
    let mut coeffs = Vec::with_capacity(target.degree() as usize);
    for b in blocks {
        let p = b.field().characteristic();
        if p != target.characteristic() {
            return Err(GaloisError::CharacteristicMismatch(
                p,
                target.characteristic(),
            ));
        }
        coeffs.extend(b.coeffs());
    }
    if coeffs.len() != target.degree() as usize {
        return Err(GaloisError::DegreeMismatch {
            blocks: coeffs.len() as u32,
            target: target.degree(),
        });
    }
    target.element(coeffs)
}

/// Outcome of [`is_w_independent`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Independence {
    Independent,
    /// Positions (into the input set) of a smallest zero-sum subset.
    Dependent {
        witness: Vec<usize>,
    },
}

impl Independence {
    pub fn holds(&self) -> bool {
        matches!(self, Independence::Independent)
    }
}

/// Exhaustively checks that no nonempty subset of size at most `w` sums to
/// zero. Subsets are searched by increasing size, so a returned witness has
/// minimum cardinality. A bound above `set.len()` covers every subset.
pub fn is_w_independent(set: &[FieldElement], w: usize) -> Result<Independence> {
    let Some(first) = set.first() else {
        return Err(GaloisError::BadBound { w, len: 0 });
    };
    let field = first.field().clone();
    if field.characteristic() != 2 {
        return Err(GaloisError::NotCharacteristicTwo(field.characteristic()));
    }
    if w == 0 {
        return Err(GaloisError::BadBound { w, len: set.len() });
    }
    let w = w.min(set.len());
    for e in set {
        field.ensure_same(e.field())?;
    }
    if field.degree() > 64 {
        return Err(GaloisError::TooLarge {
            p: 2,
            m: field.degree(),
        });
    }
    let bits: Vec<u64> = set.iter().map(FieldElement::bits).collect();
    for i in 0..bits.len() {
        for j in i + 1..bits.len() {
            if bits[i] == bits[j] {
                return Err(GaloisError::Duplicate(i, j));
            }
        }
    }
    for size in 1..=w {
        if let Some(witness) = zero_sum_of_size(&bits, size) {
            return Ok(Independence::Dependent { witness });
        }
    }
    Ok(Independence::Independent)
}

fn zero_sum_of_size(bits: &[u64], size: usize) -> Option<Vec<usize>> {
    // Iterative enumeration of `size`-subsets in lexicographic order.
    let n = bits.len();
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        if idx.iter().fold(0u64, |acc, &i| acc ^ bits[i]) == 0 {
            return Some(idx);
        }
        let mut k = size;
        while k > 0 && idx[k - 1] == n - size + k - 1 {
            k -= 1;
        }
        if k == 0 {
            return None;
        }
        idx[k - 1] += 1;
        for l in k..size {
            idx[l] = idx[l - 1] + 1;
        }
    }
}

/// For each `beta` of `base` (index order), the concatenation
/// `[1 ∘] beta^e1 ∘ beta^e2 ∘ ...` read in `target`.
pub fn bch_set(
    base: &FieldSpec,
    exponents: &[u64],
    leading_one: bool,
    target: &FieldSpec,
) -> Result<Vec<FieldElement>> {
    if base.characteristic() != 2 || target.characteristic() != 2 {
        return Err(GaloisError::NotCharacteristicTwo(
            if base.characteristic() != 2 {
                base.characteristic()
            } else {
                target.characteristic()
            },
        ));
    }
    let total = leading_one as u32 + exponents.len() as u32 * base.degree();
    if total != target.degree() {
        return Err(GaloisError::DegreeMismatch {
            blocks: total,
            target: target.degree(),
        });
    }
    let bit_field = FieldSpec::binary(1)?;
    base.elements()
        .map(|beta| {
            let mut blocks = Vec::with_capacity(exponents.len() + 1);
            if leading_one {
                blocks.push(bit_field.one());
            }
            blocks.extend(exponents.iter().map(|&e| beta.pow(e)));
            concat_elements(&blocks, target)
        })
        .collect()
}

/// A field embedding `small -> large`, determined by the image of the
/// generator of `small` (a root of its modulus inside `large`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    source: FieldSpec,
    target: FieldSpec,
    root: FieldElement,
    powers: Vec<FieldElement>,
}

impl Embedding {
    /// Uses the root of `source`'s modulus with the smallest index in `target`.
    pub fn new(source: &FieldSpec, target: &FieldSpec) -> Result<Self> {
        if source.characteristic() != target.characteristic() {
            return Err(GaloisError::CharacteristicMismatch(
                source.characteristic(),
                target.characteristic(),
            ));
        }
        if !target.degree().is_multiple_of(source.degree()) {
            return Err(GaloisError::NotDivisor {
                d: source.degree(),
                m: target.degree(),
            });
        }
        let root = target
            .elements()
            .find(|e| e.eval_prime_poly(source.modulus()).is_zero())
            .ok_or_else(|| GaloisError::NoEmbedding(source.to_string(), target.to_string()))?;
        let mut powers = Vec::with_capacity(source.degree() as usize);
        let mut acc = target.one();
        for _ in 0..source.degree() {
            powers.push(acc.clone());
            acc = acc.mul_unchecked(&root);
        }
        Ok(Embedding {
            source: source.clone(),
            target: target.clone(),
            root,
            powers,
        })
    }

    pub fn source(&self) -> &FieldSpec {
        &self.source
    }

    pub fn target(&self) -> &FieldSpec {
        &self.target
    }

    pub fn root(&self) -> &FieldElement {
        &self.root
    }

    pub fn apply(&self, e: &FieldElement) -> Result<FieldElement> {
        self.source.ensure_same(e.field())?;
        let mut acc = self.target.zero();
        for (c, power) in e.coeffs().into_iter().zip(&self.powers) {
            if c != 0 {
                acc = acc.add_unchecked(&power.scale(c as u64));
            }
        }
        Ok(acc)
    }
}
