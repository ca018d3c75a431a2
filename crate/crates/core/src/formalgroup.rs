//! One-dimensional formal group laws over `F_q` to total degree `N`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::curves::EllipticCurve;
use crate::fields::{Embedding, FieldElement, FieldError, PrimeSpec, MAX_DEGREE};
use crate::Height;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormalGroupError {
    #[error("precision {got} is below the required {need}")]
    PrecisionTooLow { need: usize, got: usize },
    #[error("formal group axiom fails: {0}")]
    Axiom(&'static str),
    #[error("valuation {0} of the [p]-series is not a power of p")]
    NotPPower(usize),
    #[error("elliptic [p]-series has valuation beyond p^2 (got {0:?})")]
    EllipticValuation(Option<usize>),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Power series in `t` truncated after `t^N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<FieldElement>,
}

impl Series {
    pub fn zero(spec: &'static PrimeSpec, prec: usize) -> Series {
        Series { coeffs: vec![spec.zero(); prec + 1] }
    }

    /// The series `c t^k`.
    pub fn monomial(c: FieldElement, k: usize, prec: usize) -> Series {
        let mut s = Series::zero(c.spec(), prec);
        if k <= prec {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn from_coeffs(spec: &'static PrimeSpec, prec: usize, coeffs: &[FieldElement]) -> Series {
        let mut s = Series::zero(spec, prec);
        for (slot, &c) in s.coeffs.iter_mut().zip(coeffs) {
            *slot = c;
        }
        s
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> FieldElement {
        self.coeffs[k]
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    pub fn add(&self, other: &Series) -> Series {
        Series { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Series) -> Series {
        Series { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a - b).collect() }
    }

    pub fn mul(&self, other: &Series) -> Series {
        let n = self.precision();
        let mut out = vec![self.coeffs[0].spec().zero(); n + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    out[i + j] = out[i + j] + a * b;
                }
            }
        }
        Series { coeffs: out }
    }
}

/// Two-variable series truncated to total degree `N`; `c[i][j]` is the
/// coefficient of `X^i Y^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Bivariate {
    prec: usize,
    c: Vec<Vec<FieldElement>>,
}

impl Bivariate {
    fn zero(spec: &'static PrimeSpec, prec: usize) -> Bivariate {
        Bivariate { prec, c: (0..=prec).map(|i| vec![spec.zero(); prec + 1 - i]).collect() }
    }

    fn monomial(c: FieldElement, i: usize, j: usize, prec: usize) -> Bivariate {
        let mut b = Bivariate::zero(c.spec(), prec);
        if i + j <= prec {
            b.c[i][j] = c;
        }
        b
    }

    fn terms(&self) -> Vec<(usize, usize, FieldElement)> {
        let mut out = Vec::new();
        for (i, row) in self.c.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_zero() {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    fn add(&self, other: &Bivariate) -> Bivariate {
        let mut out = self.clone();
        for (i, j, v) in other.terms() {
            out.c[i][j] = out.c[i][j] + v;
        }
        out
    }

    fn scale(&self, s: FieldElement) -> Bivariate {
        let mut out = self.clone();
        for row in out.c.iter_mut() {
            for v in row.iter_mut() {
                *v = *v * s;
            }
        }
        out
    }

    fn mul(&self, other: &Bivariate) -> Bivariate {
        let spec = self.c[0][0].spec();
        let mut out = Bivariate::zero(spec, self.prec);
        let rhs = other.terms();
        for (i1, j1, a) in self.terms() {
            for &(i2, j2, b) in &rhs {
                if i1 + j1 + i2 + j2 <= self.prec {
                    out.c[i1 + i2][j1 + j2] = out.c[i1 + i2][j1 + j2] + a * b;
                }
            }
        }
        out
    }
}

/// A formal group law `F(X, Y)` with coefficients up to total degree `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalGroupLaw {
    spec: &'static PrimeSpec,
    law: Bivariate,
}

/// Number of random substitutions in the associativity check.
const ASSOCIATIVITY_TRIALS: usize = 3;

pub const CHECK_FIELD_MIN_ORDER: u64 = 1000;

fn check_field(base: &'static PrimeSpec) -> &'static PrimeSpec {
    let d = base.degree();
    let p = base.p() as u64;
    let e = (d..=MAX_DEGREE)
        .step_by(d)
        .find(|&e| p.pow(e as u32) >= CHECK_FIELD_MIN_ORDER)
        .unwrap_or(MAX_DEGREE / d * d);
    PrimeSpec::extension(base.p(), e).expect("supported degree")
}

impl FormalGroupLaw {
    fn from_bivariate(law: Bivariate) -> Result<FormalGroupLaw, FormalGroupError> {
        let spec = law.c[0][0].spec();
        let g = FormalGroupLaw { spec, law };
        g.check_axioms()?;
        Ok(g)
    }

    /// Builds a law from its coefficient table `c[i][j]` (total degree
    /// `<= prec`) and checks identity, commutativity and associativity.
    pub fn new(spec: &'static PrimeSpec, prec: usize, coeffs: &[(usize, usize, FieldElement)]) -> Result<Self, FormalGroupError> {
        let mut law = Bivariate::zero(spec, prec);
        for &(i, j, v) in coeffs {
            if i + j <= prec {
                law.c[i][j] = v;
            }
        }
        FormalGroupLaw::from_bivariate(law)
    }

    pub fn spec(&self) -> &'static PrimeSpec {
        self.spec
    }

    pub fn precision(&self) -> usize {
        self.law.prec
    }

    pub fn coeff(&self, i: usize, j: usize) -> FieldElement {
        self.law.c.get(i).and_then(|r| r.get(j)).copied().unwrap_or(self.spec.zero())
    }

    fn check_axioms(&self) -> Result<(), FormalGroupError> {
        let n = self.precision();
        let (zero, one) = (self.spec.zero(), self.spec.one());
        for k in 0..=n {
            let expect = if k == 1 { one } else { zero };
            if self.coeff(k, 0) != expect || self.coeff(0, k) != expect {
                return Err(FormalGroupError::Axiom("F(X, 0) = X and F(0, Y) = Y"));
            }
        }
        for i in 0..=n {
            for j in 0..=n - i {
                if self.coeff(i, j) != self.coeff(j, i) {
                    return Err(FormalGroupError::Axiom("commutativity"));
                }
            }
        }
        if !self.associative_on_random_lines(ASSOCIATIVITY_TRIALS, 0x5eed) {
            return Err(FormalGroupError::Axiom("associativity"));
        }
        Ok(())
    }

    /// Compares `F(F(αt, βt), γt)` with `F(αt, F(βt, γt))` for random
    /// `α, β, γ` in an extension of the base field with at least
    /// [`CHECK_FIELD_MIN_ORDER`] elements when one is supported.
    pub fn associative_on_random_lines(&self, trials: usize, seed: u64) -> bool {
        let ext = check_field(self.spec);
        let emb = Embedding::new(self.spec, ext).expect("d divides e");
        let mut mapped = Bivariate::zero(ext, self.precision());
        for (i, j, v) in self.law.terms() {
            mapped.c[i][j] = emb.apply(v);
        }
        let g = FormalGroupLaw { spec: ext, law: mapped };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.precision();
        (0..trials).all(|_| {
            let [x, y, z] = [0; 3].map(|_| Series::monomial(ext.random(&mut rng), 1, n));
            g.apply(&g.apply(&x, &y), &z) == g.apply(&x, &g.apply(&y, &z))
        })
    }

    /// `F(g(t), h(t))` for series without constant term.
    pub fn apply(&self, g: &Series, h: &Series) -> Series {
        let n = self.precision();
        let spec = g.coeff(0).spec();
        let mut h_pows = vec![Series::monomial(spec.one(), 0, n)];
        for j in 1..=n {
            h_pows.push(h_pows[j - 1].mul(h));
        }
        // Horner in X over the inner sums sum_j c_ij h^j.
        let mut acc = Series::zero(spec, n);
        for i in (0..=n).rev() {
            let mut inner = Series::zero(spec, n);
            for (j, &c) in self.law.c[i].iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (slot, &v) in inner.coeffs.iter_mut().zip(&h_pows[j].coeffs) {
                    *slot = *slot + c * v;
                }
            }
            acc = acc.mul(g).add(&inner);
        }
        acc
    }

    /// `[m](t)` by repeated formal addition.
    pub fn multiplication_series(&self, m: u64) -> Series {
        let n = self.precision();
        let t = Series::monomial(self.spec.one(), 1, n);
        let mut acc = Series::zero(self.spec, n);
        for _ in 0..m {
            acc = self.apply(&t, &acc);
        }
        acc
    }

    pub fn p_series(&self) -> PSeries {
        PSeries { p: self.spec.p(), series: self.multiplication_series(self.spec.p() as u64) }
    }

    /// `ι(t)` with `F(t, ι(t)) = 0`, by fixed-point iteration.
    pub fn inverse_series(&self) -> Series {
        let n = self.precision();
        let t = Series::monomial(self.spec.one(), 1, n);
        let mut inv = Series::zero(self.spec, n).sub(&t);
        for _ in 0..n {
            let residual = self.apply(&t, &inv);
            if residual.is_zero() {
                break;
            }
            inv = inv.sub(&residual);
        }
        inv
    }
}

pub fn multiplicative_fgl(base: &'static PrimeSpec, prec: usize) -> Result<FormalGroupLaw, FormalGroupError> {
    check_precision(prec, base.p() as usize)?;
    let one = base.one();
    FormalGroupLaw::new(base, prec, &[(1, 0, one), (0, 1, one), (1, 1, one)])
}

pub fn additive_fgl(base: &'static PrimeSpec, prec: usize) -> Result<FormalGroupLaw, FormalGroupError> {
    check_precision(prec, base.p() as usize)?;
    let one = base.one();
    FormalGroupLaw::new(base, prec, &[(1, 0, one), (0, 1, one)])
}

fn check_precision(got: usize, need: usize) -> Result<(), FormalGroupError> {
    if got < need {
        return Err(FormalGroupError::PrecisionTooLow { need, got });
    }
    Ok(())
}

/// `p^2 + 4`.
pub fn default_precision(p: u32) -> usize {
    (p * p + 4) as usize
}

/// `w(z) = -1/y` as a series in `z = -x/y`, solving `w = z^3 + a z w^2 + b w^3`.
pub fn weierstrass_w(e: &EllipticCurve, prec: usize) -> Series {
    let spec = e.spec();
    let z3 = Series::monomial(spec.one(), 3, prec);
    let az = Series::monomial(e.a(), 1, prec);
    let b = Series::monomial(e.b(), 0, prec);
    let mut w = z3.clone();
    for _ in 0..prec {
        let w2 = w.mul(&w);
        let next = z3.add(&az.mul(&w2)).add(&b.mul(&w2.mul(&w)));
        if next == w {
            break;
        }
        w = next;
    }
    w
}

/// The formal group law of `y^2 = x^3 + a x + b` in the parameter `z = -x/y`.
pub fn elliptic_fgl(e: &EllipticCurve, prec: usize) -> Result<FormalGroupLaw, FormalGroupError> {
    let spec = e.spec();
    let p = spec.p() as usize;
    check_precision(prec, p * p + 1)?;
    let w = weierstrass_w(e, prec);
    let one = spec.one();
    // λ = (w(z2) - w(z1)) / (z2 - z1) = sum_n A_n sum_k z1^k z2^(n-1-k)
    let mut lambda = Bivariate::zero(spec, prec);
    for (n, &a_n) in w.coeffs().iter().enumerate() {
        if a_n.is_zero() {
            continue;
        }
        for k in 0..n {
            if n - 1 <= prec {
                lambda.c[k][n - 1 - k] = lambda.c[k][n - 1 - k] + a_n;
            }
        }
    }
    let mut w1 = Bivariate::zero(spec, prec);
    for (n, &a_n) in w.coeffs().iter().enumerate() {
        w1.c[n][0] = a_n;
    }
    let z1 = Bivariate::monomial(one, 1, 0, prec);
    let z2 = Bivariate::monomial(one, 0, 1, prec);
    let nu = w1.add(&lambda.mul(&z1).scale(-one));
    let lambda2 = lambda.mul(&lambda);
    let lambda3 = lambda2.mul(&lambda);
    // F = z1 + z2 + (2 a λ ν + 3 b λ^2 ν) / (1 + a λ^2 + b λ^3)
    let numerator = lambda
        .mul(&nu)
        .scale(spec.from_int(2) * e.a())
        .add(&lambda2.mul(&nu).scale(spec.from_int(3) * e.b()));
    let u = lambda2.scale(e.a()).add(&lambda3.scale(e.b()));
    // 1 / (1 + u) = sum (-u)^k; u has total degree >= 4.
    let neg_u = u.scale(-one);
    let mut inv = Bivariate::monomial(one, 0, 0, prec);
    let mut power = inv.clone();
    for _ in 0..prec / 4 {
        power = power.mul(&neg_u);
        inv = inv.add(&power);
    }
    let law = z1.add(&z2).add(&numerator.mul(&inv));
    FormalGroupLaw::from_bivariate(law)
}

/// `[p](t)` of a formal group law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PSeries {
    p: u32,
    series: Series,
}

impl PSeries {
    pub fn series(&self) -> &Series {
        &self.series
    }

    pub fn valuation(&self) -> Option<usize> {
        self.series.valuation()
    }

    /// Leading coefficient and its degree.
    pub fn leading_term(&self) -> Option<(FieldElement, usize)> {
        self.valuation().map(|v| (self.series.coeff(v), v))
    }
}

/// `log_p` of the valuation of `[p]`, or `∞` if `[p]` vanishes to precision.
pub fn height_of(s: &PSeries) -> Result<Height, FormalGroupError> {
    let Some(v) = s.valuation() else {
        return Ok(Height::Infinite);
    };
    let p = s.p as usize;
    let mut power = p;
    let mut h = 1;
    while power < v {
        power *= p;
        h += 1;
    }
    if power == v {
        Ok(Height::Finite(h))
    } else {
        Err(FormalGroupError::NotPPower(v))
    }
}

/// Height of the formal group of `E`; heights above 2 are reported as errors.
pub fn elliptic_height(e: &EllipticCurve, prec: usize) -> Result<(PSeries, Height), FormalGroupError> {
    let s = elliptic_fgl(e, prec)?.p_series();
    let p = e.spec().p() as usize;
    match s.valuation() {
        Some(v) if v <= p * p => {
            let h = height_of(&s)?;
            Ok((s, h))
        }
        v => Err(FormalGroupError::EllipticValuation(v)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PSeriesJson {
    pub p: u32,
    pub precision: usize,
    pub leading_coefficient: Option<String>,
    pub valuation: Option<usize>,
    pub height: Option<u32>,
    pub height_is_infinite: bool,
}

impl PSeriesJson {
    pub fn new(s: &PSeries, height: Height) -> Self {
        PSeriesJson {
            p: s.p,
            precision: s.series.precision(),
            leading_coefficient: s.leading_term().map(|(c, _)| c.to_string()),
            valuation: s.valuation(),
            height: height.finite(),
            height_is_infinite: height.is_infinite(),
        }
    }
}
