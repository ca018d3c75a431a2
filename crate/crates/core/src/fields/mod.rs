//! Finite fields `F_{p^d}`, polynomials over them, and truncated
//! differential rings `F_q[x]/(x^m)`.
//!
//! Field contexts ([`PrimeSpec`]) are interned for the lifetime of the
//! process, so a [`FieldElement`] is a small `Copy` value that carries a
//! `&'static` reference to its field.

mod poly;
mod truncated;

pub use poly::{Poly, PolyParseError};
pub use truncated::{Differential, TruncatedDiffElem};

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: usize = 8;

/// Largest supported prime.
pub const MAX_PRIME: u32 = 13;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not an odd prime <= {MAX_PRIME}")]
    UnsupportedPrime(u32),
    #[error("extension degree {0} outside 1..={MAX_DEGREE}")]
    UnsupportedDegree(usize),
    #[error("modulus must be monic of degree {expected}")]
    BadModulus { expected: usize },
    #[error("modulus is reducible over F_{0}")]
    Reducible(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live in different fields ({0} vs {1})")]
    Mismatch(String, String),
    #[error("no embedding of {0} into {1}")]
    NoEmbedding(String, String),
}

/// Common interface of the coefficient rings used by Witt vectors and
/// series arithmetic. Every ring has characteristic `p`.
pub trait Ring:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Image of an integer under `Z -> R`.
    fn from_int_like(&self, n: i64) -> Self;
    fn characteristic(&self) -> u32;

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

/// A finite field `F_p[t]/(modulus)`.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct PrimeSpec {
    p: u32,
    d: usize,
    /// Low-to-high coefficients, length `d + 1`, monic.
    modulus: Vec<u32>,
    q: u64,
}

fn interner() -> &'static Mutex<HashMap<(u32, Vec<u32>), &'static PrimeSpec>> {
    static CELL: OnceLock<Mutex<HashMap<(u32, Vec<u32>), &'static PrimeSpec>>> = OnceLock::new();
    CELL.get_or_init(|| Mutex::new(HashMap::new()))
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..n).take_while(|k| k * k <= n).all(|k| n % k != 0)
}

impl PrimeSpec {
    /// The prime field `F_p`, represented with modulus `t`.
    pub fn prime_field(p: u32) -> Result<&'static PrimeSpec, FieldError> {
        Self::new(p, &[0, 1])
    }

    /// `F_p[t]/(modulus)` for an explicit monic modulus (low-to-high).
    pub fn new(p: u32, modulus: &[u32]) -> Result<&'static PrimeSpec, FieldError> {
        if p == 2 || p > MAX_PRIME || !is_prime(p) {
            return Err(FieldError::UnsupportedPrime(p));
        }
        let d = modulus.len().saturating_sub(1);
        if d == 0 || d > MAX_DEGREE {
            return Err(FieldError::UnsupportedDegree(d));
        }
        if modulus[d] != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(FieldError::BadModulus { expected: d });
        }
        let key = (p, modulus.to_vec());
        if let Some(spec) = interner().lock().unwrap().get(&key) {
            return Ok(spec);
        }
        if !is_irreducible(p, modulus) {
            return Err(FieldError::Reducible(p));
        }
        let mut table = interner().lock().unwrap();
        let spec = *table.entry(key).or_insert_with(|| {
            Box::leak(Box::new(PrimeSpec {
                p,
                d,
                modulus: modulus.to_vec(),
                q: (p as u64).pow(d as u32),
            }))
        });
        Ok(spec)
    }

    /// `F_{p^d}` with the first irreducible monic modulus in the order of
    /// the base-`p` encoding of its lower coefficients.
    pub fn extension(p: u32, d: usize) -> Result<&'static PrimeSpec, FieldError> {
        if d == 1 {
            return Self::prime_field(p);
        }
        if p == 2 || p > MAX_PRIME || !is_prime(p) {
            return Err(FieldError::UnsupportedPrime(p));
        }
        if d == 0 || d > MAX_DEGREE {
            return Err(FieldError::UnsupportedDegree(d));
        }
        static DEFAULTS: OnceLock<Mutex<HashMap<(u32, usize), &'static PrimeSpec>>> = OnceLock::new();
        let defaults = DEFAULTS.get_or_init(Default::default);
        if let Some(spec) = defaults.lock().unwrap().get(&(p, d)) {
            return Ok(spec);
        }
        let spec = Self::search_default_modulus(p, d)?;
        defaults.lock().unwrap().insert((p, d), spec);
        Ok(spec)
    }

    fn search_default_modulus(p: u32, d: usize) -> Result<&'static PrimeSpec, FieldError> {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut modulus = digits(code, p, d);
            modulus.push(1);
            if is_irreducible(p, &modulus) {
                return Self::new(p, &modulus);
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Field size `p^d`.
    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn zero(&'static self) -> FieldElement {
        FieldElement { spec: self, coeffs: [0; MAX_DEGREE] }
    }

    pub fn one(&'static self) -> FieldElement {
        self.from_int(1)
    }

    /// The class of `t`; for `d = 1` this is the element `0`.
    pub fn generator(&'static self) -> FieldElement {
        self.from_coeffs(&[0, 1])
    }

    pub fn from_int(&'static self, n: i64) -> FieldElement {
        let mut e = self.zero();
        e.coeffs[0] = n.rem_euclid(self.p as i64) as u16;
        e
    }

    /// Element with the given low-to-high coefficients in `t`, reduced.
    pub fn from_coeffs(&'static self, coeffs: &[u32]) -> FieldElement {
        let mut wide = vec![0u32; coeffs.len().max(self.d)];
        for (w, &c) in wide.iter_mut().zip(coeffs) {
            *w = c % self.p;
        }
        self.reduce(&mut wide)
    }

    /// Element whose base-`p` digits (low first) are the coefficients.
    pub fn from_index(&'static self, index: u64) -> FieldElement {
        let mut e = self.zero();
        for (slot, dgt) in e.coeffs.iter_mut().zip(digits(index, self.p, self.d)) {
            *slot = dgt as u16;
        }
        e
    }

    /// All `q` elements in index order.
    pub fn elements(&'static self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(move |i| self.from_index(i))
    }

    pub fn random<R: Rng + ?Sized>(&'static self, rng: &mut R) -> FieldElement {
        self.from_index(rng.gen_range(0..self.q))
    }

    /// A fixed non-square: the first one in index order.
    pub fn first_nonsquare(&'static self) -> FieldElement {
        self.elements()
            .find(|e| !e.is_zero() && !e.is_square())
            .expect("odd order field has non-squares")
    }

    fn reduce(&'static self, wide: &mut [u32]) -> FieldElement {
        let p = self.p;
        let d = self.d;
        for k in (d..wide.len()).rev() {
            let c = wide[k] % p;
            if c == 0 {
                continue;
            }
            wide[k] = 0;
            for (j, &m) in self.modulus[..d].iter().enumerate() {
                let idx = k - d + j;
                wide[idx] = (wide[idx] + c * (p - m)) % p;
            }
        }
        let mut e = self.zero();
        for j in 0..d {
            e.coeffs[j] = (wide[j] % p) as u16;
        }
        e
    }

    fn label(&self) -> String {
        if self.d == 1 {
            format!("F_{}", self.p)
        } else {
            format!("F_{}^{} mod {:?}", self.p, self.d, self.modulus)
        }
    }
}

impl fmt::Display for PrimeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn digits(mut n: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((n % p as u64) as u32);
        n /= p as u64;
    }
    out
}

/// Exhaustive irreducibility test: no monic factor of degree `1..=d/2`.
fn is_irreducible(p: u32, modulus: &[u32]) -> bool {
    let d = modulus.len() - 1;
    if d == 1 {
        return true;
    }
    for k in 1..=d / 2 {
        let count = (p as u64).pow(k as u32);
        for code in 0..count {
            let mut factor = digits(code, p, k);
            factor.push(1);
            if divides_mod_p(p, &factor, modulus) {
                return false;
            }
        }
    }
    true
}

fn divides_mod_p(p: u32, factor: &[u32], target: &[u32]) -> bool {
    let mut rem: Vec<u32> = target.to_vec();
    let k = factor.len() - 1;
    for top in (k..rem.len()).rev() {
        let c = rem[top] % p;
        if c == 0 {
            continue;
        }
        for (j, &f) in factor.iter().enumerate() {
            let idx = top - k + j;
            rem[idx] = (rem[idx] + (p - c) * f) % p;
        }
    }
    rem[..k].iter().all(|&c| c % p == 0)
}

/// An element of `F_{p^d}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    spec: &'static PrimeSpec,
    coeffs: [u16; MAX_DEGREE],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Checked binary arithmetic: fails on mismatched fields or division by
/// zero instead of panicking.
pub fn field_arith(
    a: FieldElement,
    b: FieldElement,
    op: FieldOp,
) -> Result<FieldElement, FieldError> {
    a.check_same(&b)?;
    match op {
        FieldOp::Add => Ok(a + b),
        FieldOp::Sub => Ok(a - b),
        FieldOp::Mul => Ok(a * b),
        FieldOp::Div => Ok(a * b.inverse()?),
    }
}

impl FieldElement {
    pub fn spec(&self) -> &'static PrimeSpec {
        self.spec
    }

    /// Coefficients in `t`, low to high, length `d`.
    pub fn coeffs(&self) -> &[u16] {
        &self.coeffs[..self.spec.d]
    }

    pub fn index(&self) -> u64 {
        let p = self.spec.p as u64;
        self.coeffs().iter().rev().fold(0, |acc, &c| acc * p + c as u64)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    /// Value as a residue mod `p`, if the element lies in the prime field.
    pub fn as_prime(&self) -> Option<u32> {
        self.coeffs[1..].iter().all(|&c| c == 0).then_some(self.coeffs[0] as u32)
    }

    fn check_same(&self, other: &FieldElement) -> Result<(), FieldError> {
        if std::ptr::eq(self.spec, other.spec) {
            Ok(())
        } else {
            Err(FieldError::Mismatch(self.spec.label(), other.spec.label()))
        }
    }

    fn assert_same(&self, other: &FieldElement) {
        if let Err(e) = self.check_same(other) {
            panic!("{e}");
        }
    }

    pub fn pow(&self, mut e: u64) -> FieldElement {
        let mut base = *self;
        let mut acc = self.spec.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            base = base * base;
        }
        acc
    }

    pub fn inverse(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.pow(self.spec.q - 2))
    }

    /// `a^(p^r)`; negative `r` applies the inverse Frobenius.
    pub fn frobenius(&self, r: i64) -> FieldElement {
        let steps = r.rem_euclid(self.spec.d as i64);
        let mut out = *self;
        for _ in 0..steps {
            out = out.pow(self.spec.p as u64);
        }
        out
    }

    /// Zero counts as a square.
    pub fn is_square(&self) -> bool {
        self.is_zero() || self.pow((self.spec.q - 1) / 2).is_one()
    }

    /// Quadratic character: 0, 1 or -1.
    pub fn legendre(&self) -> i64 {
        if self.is_zero() {
            0
        } else if self.is_square() {
            1
        } else {
            -1
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldElement {
    /// Prime-field elements print as residues, others as `(c_k*t^k+...)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.as_prime() {
            return write!(f, "{c}");
        }
        let mut terms = Vec::new();
        for (k, &c) in self.coeffs().iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{k}"),
            };
            terms.push(match (c, k) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}*{mono}"),
            });
        }
        write!(f, "({})", terms.join("+"))
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(mut self, rhs: FieldElement) -> FieldElement {
        self.assert_same(&rhs);
        let p = self.spec.p as u16;
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a = (*a + b) % p;
        }
        self
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(mut self, rhs: FieldElement) -> FieldElement {
        self.assert_same(&rhs);
        let p = self.spec.p as u16;
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a = (*a + p - b) % p;
        }
        self
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(mut self) -> FieldElement {
        let p = self.spec.p as u16;
        for a in self.coeffs.iter_mut() {
            *a = (p - *a) % p;
        }
        self
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.assert_same(&rhs);
        let spec = self.spec;
        let d = spec.d;
        if d == 1 {
            let mut e = spec.zero();
            e.coeffs[0] = ((self.coeffs[0] as u32 * rhs.coeffs[0] as u32) % spec.p) as u16;
            return e;
        }
        let mut wide = [0u32; 2 * MAX_DEGREE];
        for i in 0..d {
            let a = self.coeffs[i] as u32;
            if a == 0 {
                continue;
            }
            for j in 0..d {
                wide[i + j] += a * rhs.coeffs[j] as u32;
            }
        }
        spec.reduce(&mut wide[..2 * d - 1])
    }
}

impl Div for FieldElement {
    type Output = FieldElement;
    /// Panics on division by zero; use [`field_arith`] for a checked form.
    fn div(self, rhs: FieldElement) -> FieldElement {
        self * rhs.inverse().expect("division by zero in finite field")
    }
}

impl Ring for FieldElement {
    fn zero_like(&self) -> Self {
        self.spec.zero()
    }
    fn one_like(&self) -> Self {
        self.spec.one()
    }
    fn is_zero(&self) -> bool {
        FieldElement::is_zero(self)
    }
    fn from_int_like(&self, n: i64) -> Self {
        self.spec.from_int(n)
    }
    fn characteristic(&self) -> u32 {
        self.spec.p
    }
    fn pow(&self, e: u64) -> Self {
        FieldElement::pow(self, e)
    }
}

/// Embedding `F_{p^d} -> F_{p^e}` (`d | e`), determined by a root of the
/// small field's modulus, found by exhaustive search.
#[derive(Debug, Clone, Copy)]
pub struct Embedding {
    from: &'static PrimeSpec,
    to: &'static PrimeSpec,
    image_of_t: FieldElement,
}

impl Embedding {
    pub fn new(from: &'static PrimeSpec, to: &'static PrimeSpec) -> Result<Embedding, FieldError> {
        let fail = || FieldError::NoEmbedding(from.label(), to.label());
        if from.p != to.p || to.d % from.d != 0 {
            return Err(fail());
        }
        if from.d == 1 {
            return Ok(Embedding { from, to, image_of_t: to.zero() });
        }
        let root = to
            .elements()
            .find(|x| {
                let mut acc = to.zero();
                for &c in from.modulus.iter().rev() {
                    acc = acc * *x + to.from_int(c as i64);
                }
                acc.is_zero()
            })
            .ok_or_else(fail)?;
        Ok(Embedding { from, to, image_of_t: root })
    }

    pub fn apply(&self, a: FieldElement) -> FieldElement {
        assert!(std::ptr::eq(a.spec, self.from), "element outside embedding domain");
        let mut acc = self.to.zero();
        for &c in a.coeffs().iter().rev() {
            acc = acc * self.image_of_t + self.to.from_int(c as i64);
        }
        acc
    }

    pub fn target(&self) -> &'static PrimeSpec {
        self.to
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f9() -> &'static PrimeSpec {
        PrimeSpec::new(3, &[1, 0, 1]).unwrap()
    }

    #[test]
    fn prime_field_addition_wraps() {
        let f3 = PrimeSpec::prime_field(3).unwrap();
        assert_eq!(f3.from_int(2) + f3.from_int(2), f3.from_int(1));
    }

    #[test]
    fn t_squared_is_minus_one_in_f9() {
        let t = f9().generator();
        assert_eq!(t * t, f9().from_int(2));
    }

    #[test]
    fn self_division_is_one() {
        let a = f9().generator() + f9().one();
        assert_eq!(field_arith(a, a, FieldOp::Div).unwrap(), f9().one());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let a = f9().one();
        assert_eq!(field_arith(a, f9().zero(), FieldOp::Div), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn mismatched_fields_are_an_error() {
        let a = f9().one();
        let b = PrimeSpec::prime_field(3).unwrap().one();
        assert!(matches!(field_arith(a, b, FieldOp::Add), Err(FieldError::Mismatch(..))));
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(PrimeSpec::prime_field(2), Err(FieldError::UnsupportedPrime(2)));
        assert_eq!(PrimeSpec::prime_field(9), Err(FieldError::UnsupportedPrime(9)));
        assert_eq!(PrimeSpec::new(5, &[1, 0, 1]), Err(FieldError::Reducible(5)));
        assert_eq!(PrimeSpec::new(3, &[1, 0, 2]), Err(FieldError::BadModulus { expected: 2 }));
    }

    #[test]
    fn default_extension_moduli() {
        assert_eq!(PrimeSpec::extension(3, 2).unwrap().modulus(), &[1, 0, 1]);
        assert_eq!(PrimeSpec::extension(5, 2).unwrap().modulus(), &[2, 0, 1]);
        assert!(std::ptr::eq(PrimeSpec::extension(3, 2).unwrap(), f9()));
    }

    #[test]
    fn frobenius_examples() {
        let t = f9().generator();
        // oracle: t^3 by repeated multiplication
        let cube = t * t * t;
        assert_eq!(t.frobenius(1), cube);
        assert_eq!(cube, f9().from_coeffs(&[0, 2]));
        assert_eq!(t.frobenius(0), t);
        let f3 = PrimeSpec::prime_field(3).unwrap();
        assert_eq!(f3.from_int(2).frobenius(5), f3.from_int(2));
        assert_eq!(t.frobenius(-1).frobenius(1), t);
    }

    #[test]
    fn embedding_respects_arithmetic() {
        let small = f9();
        let big = PrimeSpec::extension(3, 4).unwrap();
        let emb = Embedding::new(small, big).unwrap();
        for a in small.elements() {
            for b in small.elements() {
                assert_eq!(emb.apply(a * b), emb.apply(a) * emb.apply(b));
                assert_eq!(emb.apply(a + b), emb.apply(a) + emb.apply(b));
            }
        }
    }

    #[test]
    fn element_count_and_nonsquares() {
        let spec = PrimeSpec::extension(5, 2).unwrap();
        assert_eq!(spec.elements().count(), 25);
        let squares = spec.elements().filter(|e| !e.is_zero() && e.is_square()).count();
        assert_eq!(squares, 12);
    }

    fn specs() -> Vec<&'static PrimeSpec> {
        let mut out = Vec::new();
        for p in [3, 5, 7, 11, 13] {
            for d in 1..=3 {
                out.push(PrimeSpec::extension(p, d).unwrap());
            }
        }
        out
    }

    proptest! {
        #[test]
        fn field_axioms(which in 0usize..15, x in any::<u64>(), y in any::<u64>(), z in any::<u64>()) {
            let spec = specs()[which];
            let q = spec.order();
            let (a, b, c) = (spec.from_index(x % q), spec.from_index(y % q), spec.from_index(z % q));
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!(a - a, spec.zero());
            if !a.is_zero() {
                prop_assert_eq!(a * a.inverse().unwrap(), spec.one());
            }
        }

        #[test]
        fn frobenius_is_a_ring_map_of_order_d(which in 0usize..15, x in any::<u64>(), y in any::<u64>()) {
            let spec = specs()[which];
            let q = spec.order();
            let (a, b) = (spec.from_index(x % q), spec.from_index(y % q));
            prop_assert_eq!((a * b).frobenius(1), a.frobenius(1) * b.frobenius(1));
            prop_assert_eq!((a + b).frobenius(1), a.frobenius(1) + b.frobenius(1));
            prop_assert_eq!(a.frobenius(spec.degree() as i64), a);
        }
    }
}
