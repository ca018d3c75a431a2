use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use super::{FieldElement, Poly, PrimeSpec, Ring};

/// An element of `F_q[x]/(x^m)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncatedDiffElem {
    spec: &'static PrimeSpec,
    coeffs: Vec<FieldElement>,
}

/// A 1-form `c(x) dx` on `F_q[x]/(x^m)`, with `c` taken mod `x^(m-1)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Differential {
    spec: &'static PrimeSpec,
    coeffs: Vec<FieldElement>,
}

impl TruncatedDiffElem {
    pub fn zero(spec: &'static PrimeSpec, m: usize) -> Self {
        assert!(m >= 1, "truncation order must be positive");
        TruncatedDiffElem { spec, coeffs: vec![spec.zero(); m] }
    }

    /// Truncates `coeffs` (low to high) to order `m`.
    pub fn from_coeffs(spec: &'static PrimeSpec, m: usize, coeffs: &[FieldElement]) -> Self {
        let mut out = Self::zero(spec, m);
        for (slot, &c) in out.coeffs.iter_mut().zip(coeffs) {
            *slot = c;
        }
        out
    }

    pub fn from_poly(poly: &Poly, m: usize) -> Self {
        Self::from_coeffs(poly.spec(), m, poly.coeffs())
    }

    /// `c * x^k`, zero if `k >= m`.
    pub fn monomial(c: FieldElement, k: usize, m: usize) -> Self {
        let mut out = Self::zero(c.spec(), m);
        if k < m {
            out.coeffs[k] = c;
        }
        out
    }

    pub fn random<R: Rng + ?Sized>(spec: &'static PrimeSpec, m: usize, rng: &mut R) -> Self {
        TruncatedDiffElem { spec, coeffs: (0..m).map(|_| spec.random(rng)).collect() }
    }

    pub fn spec(&self) -> &'static PrimeSpec {
        self.spec
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn to_poly(&self) -> Poly {
        Poly::new(self.spec, self.coeffs.clone())
    }

    /// `d(g) = g'(x) dx`; the `x^(m-1)` term of `g'` is dropped.
    pub fn formal_derivative(&self) -> Differential {
        let m = self.order();
        let coeffs = (1..m)
            .map(|k| self.coeffs[k] * self.spec.from_int(k as i64))
            .collect();
        Differential { spec: self.spec, coeffs }
    }

    fn assert_compatible(&self, other: &Self) {
        assert!(
            std::ptr::eq(self.spec, other.spec) && self.order() == other.order(),
            "truncated ring mismatch"
        );
    }
}

impl Differential {
    pub fn zero(spec: &'static PrimeSpec, m: usize) -> Self {
        Differential { spec, coeffs: vec![spec.zero(); m.saturating_sub(1)] }
    }

    /// `c(x) dx` from the low-to-high coefficients of `c`, truncated.
    pub fn from_coeffs(spec: &'static PrimeSpec, m: usize, coeffs: &[FieldElement]) -> Self {
        let mut out = Self::zero(spec, m);
        for (slot, &c) in out.coeffs.iter_mut().zip(coeffs) {
            *slot = c;
        }
        out
    }

    /// Coefficients of `c(x)`, length `m - 1`.
    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// `g * omega`, the module action of the function ring.
    pub fn scale(&self, g: &TruncatedDiffElem) -> Differential {
        let n = self.coeffs.len();
        let mut out = vec![self.spec.zero(); n];
        for (i, a) in g.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in self.coeffs.iter().enumerate().take(n - i) {
                out[i + j] = out[i + j] + *a * *b;
            }
        }
        Differential { spec: self.spec, coeffs: out }
    }
}

impl Add for Differential {
    type Output = Differential;
    fn add(self, rhs: Differential) -> Differential {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "differential order mismatch");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(&a, &b)| a + b).collect();
        Differential { spec: self.spec, coeffs }
    }
}

impl fmt::Display for Differential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = Poly::new(self.spec, self.coeffs.clone());
        write!(f, "({c})*dx")
    }
}

impl fmt::Debug for Differential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TruncatedDiffElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod x^{}", self.to_poly(), self.order())
    }
}

impl fmt::Debug for TruncatedDiffElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add for TruncatedDiffElem {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.assert_compatible(&rhs);
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a = *a + b;
        }
        self
    }
}

impl Sub for TruncatedDiffElem {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.assert_compatible(&rhs);
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a = *a - b;
        }
        self
    }
}

impl Neg for TruncatedDiffElem {
    type Output = Self;
    fn neg(mut self) -> Self {
        for a in self.coeffs.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul for TruncatedDiffElem {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.assert_compatible(&rhs);
        let m = self.order();
        let mut out = vec![self.spec.zero(); m];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate().take(m - i) {
                out[i + j] = out[i + j] + a * b;
            }
        }
        TruncatedDiffElem { spec: self.spec, coeffs: out }
    }
}

impl Ring for TruncatedDiffElem {
    fn zero_like(&self) -> Self {
        Self::zero(self.spec, self.order())
    }
    fn one_like(&self) -> Self {
        Self::monomial(self.spec.one(), 0, self.order())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
    fn from_int_like(&self, n: i64) -> Self {
        Self::monomial(self.spec.from_int(n), 0, self.order())
    }
    fn characteristic(&self) -> u32 {
        self.spec.p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f3() -> &'static PrimeSpec {
        PrimeSpec::prime_field(3).unwrap()
    }

    fn elem(s: &str, m: usize) -> TruncatedDiffElem {
        TruncatedDiffElem::from_poly(&Poly::parse(f3(), s).unwrap(), m)
    }

    fn form(s: &str, m: usize) -> Differential {
        let c = Poly::parse(f3(), s).unwrap();
        let mut out = Differential::zero(f3(), m);
        for (slot, &v) in out.coeffs.iter_mut().zip(c.coeffs()) {
            *slot = v;
        }
        out
    }

    #[test]
    fn derivative_examples() {
        assert!(elem("x^3", 10).formal_derivative().is_zero());
        assert_eq!(elem("x^2", 10).formal_derivative(), form("2*x", 10));
        assert_eq!(elem("x^4+x", 10).formal_derivative(), form("x^3+1", 10));
    }

    #[test]
    fn truncation_drops_high_terms() {
        let a = elem("x^2+1", 3);
        assert_eq!(a.clone() * a, elem("2*x^2+1", 3));
    }

    #[test]
    fn leibniz_rule_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [3, 5, 7] {
            let spec = PrimeSpec::extension(p, 2).unwrap();
            let m = (p * p + 1) as usize;
            for _ in 0..50 {
                let a = TruncatedDiffElem::random(spec, m, &mut rng);
                let b = TruncatedDiffElem::random(spec, m, &mut rng);
                let lhs = (a.clone() * b.clone()).formal_derivative();
                let rhs = b.formal_derivative().scale(&a) + a.formal_derivative().scale(&b);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn kernel_of_d_is_span_of_pth_powers() {
        // Over F_3 with m = 10: g' = 0 iff only exponents divisible by 3 occur.
        let m = 10;
        for k in 0..m {
            let g = TruncatedDiffElem::monomial(f3().one(), k, m);
            assert_eq!(g.formal_derivative().is_zero(), k % 3 == 0, "x^{k}");
        }
    }
}
