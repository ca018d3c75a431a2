//! Truncated Witt vectors `W_n(R)` over characteristic-`p` rings, the
//! operators `F`, `V`, `R`, and Serre's map `D_i : W_i(O) -> Omega^1`.
//!
//! Lengths: `F : W_n -> W_n`, `V : W_n -> W_{n+1}`, `R : W_n -> W_{n-1}`.
//!
//! Addition and multiplication use the decomposition
//! `a = [a_0] + V(a')` together with
//!
//! * `[x] + [y] = (sigma_0(x,y), sigma_1(x,y), ..)` (Teichmüller sums),
//! * `[x] * b = (x b_0, x^p b_1, x^(p^2) b_2, ..)`,
//! * `V(a) * b = V(a * F(b))` and `F V = p`,
//!
//! which agree with evaluating the universal polynomials of
//! [`WittPolyTable`] but avoid their size blow-up.

mod selfcheck;
mod table;

pub use selfcheck::{selfcheck, RelationResult, SelfcheckConfig};
pub use table::{build_witt_table, IntPoly, TeichmullerSums, WittPolyTable, SYMBOLIC_CHECK_MAX_LEN};

use std::fmt;

use thiserror::Error;

use crate::fields::{Differential, FieldError, Ring, TruncatedDiffElem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WittError {
    #[error("Witt vectors must have length at least 1")]
    ZeroLength,
    #[error("shape mismatch: (p={0}, n={1}) vs (p={2}, n={3})")]
    ShapeMismatch(u32, usize, u32, usize),
    #[error("coordinates live in different coefficient rings")]
    RingMismatch,
    #[error("restriction of a length-1 Witt vector")]
    RestrictLengthOne,
    #[error("non-exact division by p while solving ghost components")]
    InexactDivision,
    #[error("ghost identity fails at index {index}")]
    GhostIdentity { index: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A Witt vector of length `n` with coordinates in a ring of characteristic `p`.
#[derive(Clone, PartialEq)]
pub struct WittVec<R: Ring> {
    p: u32,
    coords: Vec<R>,
}

/// A 1-form `c(x) dx`, the target of Serre's map.
pub type WittDifferential = Differential;

impl<R: Ring> WittVec<R> {
    pub fn new(coords: Vec<R>) -> Result<Self, WittError> {
        let first = coords.first().ok_or(WittError::ZeroLength)?;
        let p = first.characteristic();
        let zero = first.zero_like();
        if coords.iter().any(|c| c.zero_like() != zero) {
            return Err(WittError::RingMismatch);
        }
        Ok(WittVec { p, coords })
    }

    pub fn zero_like(template: &R, n: usize) -> Self {
        assert!(n >= 1, "Witt vectors must have length at least 1");
        WittVec { p: template.characteristic(), coords: vec![template.zero_like(); n] }
    }

    pub fn one_like(template: &R, n: usize) -> Self {
        Self::teichmuller(template.one_like(), n)
    }

    /// `[x] = (x, 0, .., 0)`.
    pub fn teichmuller(x: R, n: usize) -> Self {
        let mut out = Self::zero_like(&x, n);
        out.coords[0] = x;
        out
    }

    /// Image of the integer `k` under `Z -> W_n(R)`.
    pub fn from_int(template: &R, n: usize, k: u64) -> Self {
        Self::one_like(template, n).mul_int(k)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[R] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<R> {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    fn check_shape(&self, other: &Self) -> Result<(), WittError> {
        if self.p != other.p || self.len() != other.len() {
            return Err(WittError::ShapeMismatch(self.p, self.len(), other.p, other.len()));
        }
        if self.coords[0].zero_like() != other.coords[0].zero_like() {
            return Err(WittError::RingMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, WittError> {
        self.check_shape(other)?;
        let sums = TeichmullerSums::get(self.p, self.len());
        Ok(WittVec { p: self.p, coords: add_coords(&sums, &self.coords, &other.coords) })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, WittError> {
        self.check_shape(other)?;
        let sums = TeichmullerSums::get(self.p, self.len());
        Ok(WittVec { p: self.p, coords: mul_coords(&sums, self.p, &self.coords, &other.coords) })
    }

    /// Additive inverse; coordinatewise negation since `p` is odd.
    pub fn neg(&self) -> Self {
        WittVec { p: self.p, coords: self.coords.iter().map(|c| -c.clone()).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, WittError> {
        self.add(&other.neg())
    }

    /// `k * self` by double-and-add.
    pub fn mul_int(&self, mut k: u64) -> Self {
        let sums = TeichmullerSums::get(self.p, self.len());
        let mut acc = vec![self.coords[0].zero_like(); self.len()];
        let mut base = self.coords.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = add_coords(&sums, &acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = add_coords(&sums, &base, &base);
            }
        }
        WittVec { p: self.p, coords: acc }
    }

    /// Frobenius: coordinatewise `p`-th power, same length.
    pub fn frobenius(&self) -> Self {
        let p = self.p as u64;
        WittVec { p: self.p, coords: self.coords.iter().map(|c| c.pow(p)).collect() }
    }

    /// Verschiebung into length `n + 1`.
    pub fn verschiebung(&self) -> Self {
        let mut coords = Vec::with_capacity(self.len() + 1);
        coords.push(self.coords[0].zero_like());
        coords.extend(self.coords.iter().cloned());
        WittVec { p: self.p, coords }
    }

    /// Restriction to length `n - 1`.
    pub fn restrict(&self) -> Result<Self, WittError> {
        if self.len() < 2 {
            return Err(WittError::RestrictLengthOne);
        }
        Ok(WittVec { p: self.p, coords: self.coords[..self.len() - 1].to_vec() })
    }

    /// Truncation to the first `len` coordinates.
    pub fn truncate(&self, len: usize) -> Self {
        assert!(len >= 1 && len <= self.len());
        WittVec { p: self.p, coords: self.coords[..len].to_vec() }
    }

    /// Applies the universal polynomials directly; slow, used to
    /// cross-check the arithmetic.
    pub fn add_mul_via_table(&self, other: &Self, table: &WittPolyTable) -> Result<(Self, Self), WittError> {
        self.check_shape(other)?;
        if table.p != self.p || table.n != self.len() {
            return Err(WittError::ShapeMismatch(table.p, table.n, self.p, self.len()));
        }
        let (s, m) = table.eval(&self.coords, &other.coords);
        Ok((WittVec { p: self.p, coords: s }, WittVec { p: self.p, coords: m }))
    }
}

fn add_coords<R: Ring>(sums: &TeichmullerSums, a: &[R], b: &[R]) -> Vec<R> {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![a[0].clone() + b[0].clone()];
    }
    // [a0] + [b0] = [t0] + V(t'), so a + b = [t0] + V(t' + a' + b')
    let t = sums.eval(&a[0], &b[0], n);
    let tail = add_coords(sums, &add_coords(sums, &t[1..], &a[1..]), &b[1..]);
    let mut out = Vec::with_capacity(n);
    out.push(t[0].clone());
    out.extend(tail);
    out
}

/// `[x] * b`.
fn teich_scale<R: Ring>(p: u32, x: &R, b: &[R]) -> Vec<R> {
    let mut factor = x.clone();
    b.iter()
        .map(|c| {
            let out = factor.clone() * c.clone();
            factor = factor.pow(p as u64);
            out
        })
        .collect()
}

fn mul_coords<R: Ring>(sums: &TeichmullerSums, p: u32, a: &[R], b: &[R]) -> Vec<R> {
    let n = a.len();
    let head = a[0].clone() * b[0].clone();
    if n == 1 {
        return vec![head];
    }
    // ([a0] + V a')([b0] + V b') = [a0 b0] + V([a0^p] b' + [b0^p] a' + a' * FV b')
    let (a_tail, b_tail) = (&a[1..], &b[1..]);
    let pe = p as u64;
    let left = teich_scale(p, &a[0].pow(pe), b_tail);
    let right = teich_scale(p, &b[0].pow(pe), a_tail);
    // F V b' = p b' = (0, b'_0^p, .., b'_{n-3}^p) at length n - 1
    let mut p_times_b: Vec<R> = Vec::with_capacity(n - 1);
    p_times_b.push(b[0].zero_like());
    p_times_b.extend(b_tail[..n - 2].iter().map(|c| c.pow(pe)));
    let cross = mul_coords(sums, p, a_tail, &p_times_b);
    let tail = add_coords(sums, &add_coords(sums, &left, &right), &cross);
    let mut out = Vec::with_capacity(n);
    out.push(head);
    out.extend(tail);
    out
}

impl<R: Ring + fmt::Display> fmt::Display for WittVec<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl<R: Ring> fmt::Debug for WittVec<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WittVec{:?}", self.coords)
    }
}

/// Serre's map `D_i(a_0,..,a_{i-1}) = sum_j a_j^(p^(i-1-j) - 1) da_j`, with
/// `i` the length of `a`.
pub fn serre_d(a: &WittVec<TruncatedDiffElem>) -> WittDifferential {
    let i = a.len();
    let p = a.p as u64;
    let first = &a.coords[0];
    let mut acc = Differential::zero(first.spec(), first.order());
    for (j, aj) in a.coords.iter().enumerate() {
        let exp = p.pow((i - 1 - j) as u32) - 1;
        acc = acc + aj.formal_derivative().scale(&aj.pow(exp));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FieldElement, Poly, PrimeSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f3() -> &'static PrimeSpec {
        PrimeSpec::prime_field(3).unwrap()
    }

    fn w(spec: &'static PrimeSpec, xs: &[i64]) -> WittVec<FieldElement> {
        WittVec::new(xs.iter().map(|&x| spec.from_int(x)).collect()).unwrap()
    }

    fn trunc(s: &str, m: usize) -> TruncatedDiffElem {
        TruncatedDiffElem::from_poly(&Poly::parse(f3(), s).unwrap(), m)
    }

    #[test]
    fn one_plus_one_in_w2_f3() {
        // Ghost check by hand: w_1 = 1 + 1 = 2, S_0 = 2, S_1 = (2 - 8)/3 = -2 = 1.
        let one = w(f3(), &[1, 0]);
        assert_eq!(one.add(&one).unwrap(), w(f3(), &[2, 1]));
    }

    #[test]
    fn one_is_multiplicative_identity() {
        let one = w(f3(), &[1, 0]);
        let x = w(f3(), &[2, 1]);
        assert_eq!(one.mul(&x).unwrap(), x);
    }

    #[test]
    fn three_in_w2_f3_is_v_one() {
        let one = w(f3(), &[1, 0]);
        let three = one.add(&one).unwrap().add(&one).unwrap();
        assert_eq!(three, w(f3(), &[0, 1]));
        assert_eq!(three, w(f3(), &[1]).frobenius().verschiebung());
    }

    #[test]
    fn w_n_of_fp_is_z_mod_p_to_the_n() {
        // k -> Witt vector of k is injective on 0..p^n and wraps at p^n
        let spec = PrimeSpec::prime_field(5).unwrap();
        let one = WittVec::one_like(&spec.one(), 3);
        assert!(one.mul_int(125).is_zero());
        let mut seen = std::collections::HashSet::new();
        for k in 0..125 {
            let v = one.mul_int(k);
            assert!(seen.insert(v.coords().iter().map(|c| c.index()).collect::<Vec<_>>()));
        }
    }

    #[test]
    fn operator_examples() {
        assert_eq!(w(f3(), &[1, 2]).frobenius(), w(f3(), &[1, 2]));
        assert_eq!(w(f3(), &[2]).verschiebung(), w(f3(), &[0, 2]));
        assert_eq!(w(f3(), &[1, 2, 0]).restrict().unwrap(), w(f3(), &[1, 2]));
        assert_eq!(w(f3(), &[1]).restrict(), Err(WittError::RestrictLengthOne));
    }

    #[test]
    fn shape_errors() {
        let a = w(f3(), &[1, 0]);
        let b = w(f3(), &[1, 0, 0]);
        assert!(matches!(a.add(&b), Err(WittError::ShapeMismatch(..))));
        let f9 = PrimeSpec::extension(3, 2).unwrap();
        let c = w(f9, &[1, 0]);
        assert_eq!(a.mul(&c), Err(WittError::RingMismatch));
        assert_eq!(WittVec::<FieldElement>::new(vec![]), Err(WittError::ZeroLength));
    }

    #[test]
    fn serre_d_examples() {
        let m = 9;
        let x = trunc("x", m);
        let zero = trunc("0", m);
        let d1 = serre_d(&WittVec::new(vec![x.clone()]).unwrap());
        assert_eq!(d1, x.formal_derivative());

        let a = WittVec::new(vec![x.clone(), zero]).unwrap();
        let d2 = serre_d(&a);
        let x_squared_dx = Differential::from_coeffs(f3(), m, &[f3().zero(), f3().zero(), f3().one()]);
        assert_eq!(d2, x_squared_dx);

        let doubled = a.add(&a).unwrap();
        assert_eq!(doubled, WittVec::new(vec![trunc("2*x", m), trunc("x^3", m)]).unwrap());
        let sum_form = d2.clone() + d2.clone();
        assert_eq!(serre_d(&doubled), sum_form);
        assert_eq!(sum_form.coeffs()[2], f3().from_int(2));
    }

    #[test]
    fn table_and_recursive_arithmetic_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (p, n, d) in [(3, 3, 2), (3, 4, 1), (5, 3, 2), (7, 3, 1)] {
            let spec = PrimeSpec::extension(p, d).unwrap();
            let table = build_witt_table(p, n).unwrap();
            for _ in 0..20 {
                let a = WittVec::new((0..n).map(|_| spec.random(&mut rng)).collect()).unwrap();
                let b = WittVec::new((0..n).map(|_| spec.random(&mut rng)).collect()).unwrap();
                let (s, m) = a.add_mul_via_table(&b, &table).unwrap();
                assert_eq!(a.add(&b).unwrap(), s);
                assert_eq!(a.mul(&b).unwrap(), m);
            }
        }
    }

    #[test]
    fn table_agreement_over_truncated_ring() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = PrimeSpec::prime_field(3).unwrap();
        let table = build_witt_table(3, 3).unwrap();
        for _ in 0..10 {
            let a = WittVec::new((0..3).map(|_| TruncatedDiffElem::random(spec, 10, &mut rng)).collect()).unwrap();
            let b = WittVec::new((0..3).map(|_| TruncatedDiffElem::random(spec, 10, &mut rng)).collect()).unwrap();
            let (s, m) = a.add_mul_via_table(&b, &table).unwrap();
            assert_eq!(a.add(&b).unwrap(), s);
            assert_eq!(a.mul(&b).unwrap(), m);
        }
    }
}
