//! Genus-2 curves `y^2 = f(x)` with `deg f ∈ {5, 6}` and elliptic curves
//! `y^2 = x^3 + a x + b` over `F_q`, `q = p^d`.
//!
//! Two routes to the p-rank: the Cartier–Manin matrix (stable rank of a
//! twist-1 semilinear map) and the Newton polygon of the L-polynomial
//! obtained by exhaustive point counting.

use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{Embedding, FieldElement, FieldError, Poly, PrimeSpec};
use crate::semilinear::{Matrix, SigmaLinearMap};
use crate::Height;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("genus-2 curves need deg f in {{5, 6}}, got {0:?}")]
    BadDegree(Option<usize>),
    #[error("f = {0} is not squarefree")]
    NotSquarefree(String),
    #[error("singular cubic: 4a^3 + 27b^2 = 0")]
    Singular,
    #[error("a2 = ({0})/2 is not an integer")]
    NonIntegerA2(i64),
    #[error(
        "oracle disagreement for y^2 = {curve}: Cartier–Manin p-rank {cartier_p_rank}, \
         Newton slopes [{slopes}]"
    )]
    OracleDisagreement { curve: String, cartier_p_rank: u32, slopes: String },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `y^2 = f(x)` with `f` squarefree of degree 5 or 6.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genus2Curve {
    f: Poly,
}

impl Genus2Curve {
    pub fn new(f: Poly) -> Result<Self, CurveError> {
        match f.degree() {
            Some(5) | Some(6) => {}
            d => return Err(CurveError::BadDegree(d)),
        }
        if !f.is_squarefree() {
            return Err(CurveError::NotSquarefree(f.to_string()));
        }
        Ok(Genus2Curve { f })
    }

    pub fn f(&self) -> &Poly {
        &self.f
    }

    pub fn spec(&self) -> &'static PrimeSpec {
        self.f.spec()
    }

    pub fn cartier_manin_matrix(&self) -> Matrix {
        hasse_witt_matrix(&self.f, 2)
    }

    pub fn p_rank(&self) -> u32 {
        semilinear_of(&self.cartier_manin_matrix()).stable_rank() as u32
    }

    pub fn a_number(&self) -> u32 {
        2 - self.cartier_manin_matrix().rank() as u32
    }

    /// Projective points of the smooth model over `F_{q^m}`.
    pub fn count_points(&self, m: usize) -> Result<u64, CurveError> {
        count_hyperelliptic(&self.f, m)
    }

    pub fn l_polynomial(&self) -> Result<LPolynomial, CurveError> {
        let q = self.spec().order() as i64;
        let a1 = self.count_points(1)? as i64 - q - 1;
        let twice_a2 = self.count_points(2)? as i64 - q * q - 1 + a1 * a1;
        if twice_a2 % 2 != 0 {
            return Err(CurveError::NonIntegerA2(twice_a2));
        }
        Ok(LPolynomial::new(self.spec(), vec![1, a1, twice_a2 / 2, q * a1, q * q]))
    }
}

/// `y^2 = x^3 + a x + b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EllipticCurve {
    a: FieldElement,
    b: FieldElement,
}

impl EllipticCurve {
    pub fn new(a: FieldElement, b: FieldElement) -> Result<Self, CurveError> {
        if !std::ptr::eq(a.spec(), b.spec()) {
            return Err(FieldError::Mismatch(a.spec().to_string(), b.spec().to_string()).into());
        }
        let spec = a.spec();
        let disc = spec.from_int(4) * a.pow(3) + spec.from_int(27) * b.pow(2);
        // In characteristic 3 the discriminant is 4a^3 and still detects repeated roots.
        if disc.is_zero() {
            return Err(CurveError::Singular);
        }
        Ok(EllipticCurve { a, b })
    }

    pub fn from_ints(spec: &'static PrimeSpec, a: i64, b: i64) -> Result<Self, CurveError> {
        EllipticCurve::new(spec.from_int(a), spec.from_int(b))
    }

    pub fn a(&self) -> FieldElement {
        self.a
    }

    pub fn b(&self) -> FieldElement {
        self.b
    }

    pub fn spec(&self) -> &'static PrimeSpec {
        self.a.spec()
    }

    /// The cubic `x^3 + a x + b`.
    pub fn cubic(&self) -> Poly {
        let spec = self.spec();
        Poly::new(spec, vec![self.b, self.a, spec.zero(), spec.one()])
    }

    /// Coefficient of `x^(p-1)` in `(x^3 + a x + b)^((p-1)/2)`.
    pub fn hasse_invariant(&self) -> FieldElement {
        hasse_witt_matrix(&self.cubic(), 1).get(0, 0)
    }

    pub fn count_points(&self, m: usize) -> Result<u64, CurveError> {
        count_hyperelliptic(&self.cubic(), m)
    }

    /// `a_q = q + 1 - #E(F_q)`.
    pub fn trace(&self) -> Result<i64, CurveError> {
        Ok(self.spec().order() as i64 + 1 - self.count_points(1)? as i64)
    }

    pub fn l_polynomial(&self) -> Result<LPolynomial, CurveError> {
        let q = self.spec().order() as i64;
        Ok(LPolynomial::new(self.spec(), vec![1, -self.trace()?, q]))
    }
}

/// `M_ij = [x^(i p - j)] f^((p-1)/2)` for `1 <= i, j <= g`.
pub fn hasse_witt_matrix(f: &Poly, genus: usize) -> Matrix {
    let spec = f.spec();
    let p = spec.p() as usize;
    let power = f.pow(((p - 1) / 2) as u64);
    let mut m = Matrix::zero(spec, genus, genus);
    for i in 1..=genus {
        for j in 1..=genus {
            m.set(i - 1, j - 1, power.coeff(i * p - j));
        }
    }
    m
}

fn semilinear_of(m: &Matrix) -> SigmaLinearMap {
    SigmaLinearMap::new(m.clone(), 1).expect("square matrix, twist 1")
}

/// Points of the smooth model of `y^2 = f(x)` over `F_{q^m}`: affine
/// solutions plus one point at infinity for odd degree, or `1 + χ(lead)`
/// for even degree.
pub fn count_hyperelliptic(f: &Poly, m: usize) -> Result<u64, CurveError> {
    let base = f.spec();
    let ext = PrimeSpec::extension(base.p(), base.degree() * m)?;
    let emb = Embedding::new(base, ext)?;
    let g = Poly::new(ext, f.coeffs().iter().map(|&c| emb.apply(c)).collect());
    let affine: i64 = ext.elements().map(|x| 1 + g.eval(x).legendre()).sum();
    let lead = g.leading().expect("nonzero polynomial");
    let infinity = match g.degree() {
        Some(d) if d % 2 == 1 => 1,
        _ => 1 + lead.legendre(),
    };
    Ok((affine + infinity) as u64)
}

/// `L(T) = sum c_k T^k` of a curve over `F_q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LPolynomial {
    pub p: u32,
    pub field_deg: usize,
    pub coeffs: Vec<i64>,
}

impl LPolynomial {
    pub fn new(spec: &PrimeSpec, coeffs: Vec<i64>) -> Self {
        LPolynomial { p: spec.p(), field_deg: spec.degree(), coeffs }
    }

    pub fn genus(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    pub fn q(&self) -> i64 {
        (self.p as i64).pow(self.field_deg as u32)
    }

    /// `c_(2g-k) = q^(g-k) c_k`.
    pub fn functional_equation_holds(&self) -> bool {
        let g = self.genus();
        let q = self.q();
        (0..=g).all(|k| self.coeffs[2 * g - k] == q.pow((g - k) as u32) * self.coeffs[k])
    }

    /// Complex roots of `T^(2g) L(1/T)`, by Durand–Kerner iteration.
    pub fn reciprocal_roots(&self) -> Vec<Complex64> {
        // Monic reversed polynomial: coefficient of T^(n-k) is c_k.
        let c: Vec<f64> = self.coeffs.iter().map(|&x| x as f64).collect();
        let n = c.len() - 1;
        let eval = |z: Complex64| c.iter().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck);
        let radius = (self.q() as f64).sqrt();
        let seed = Complex64::new(0.4, 0.9);
        let mut roots: Vec<Complex64> =
            (0..n).map(|k| seed.powu(k as u32) * radius).collect();
        for _ in 0..500 {
            let mut delta: f64 = 0.0;
            for i in 0..n {
                let denom = (0..n)
                    .filter(|&j| j != i)
                    .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (roots[i] - roots[j]));
                let step = eval(roots[i]) / denom;
                roots[i] -= step;
                delta = delta.max(step.norm());
            }
            if delta < 1e-13 {
                break;
            }
        }
        roots
    }

    /// Largest `| |α| - sqrt(q) |` over the reciprocal roots.
    pub fn weil_deviation(&self) -> f64 {
        let radius = (self.q() as f64).sqrt();
        self.reciprocal_roots().iter().map(|z| (z.norm() - radius).abs()).fold(0.0, f64::max)
    }
}

impl fmt::Display for LPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| match k {
                0 => c.to_string(),
                1 => format!("{c}*T"),
                _ => format!("{c}*T^{k}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

fn valuation(mut n: i64, p: i64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    Some(v)
}

/// Slopes of the lower convex hull of `(k, v_q(c_k))`, ascending, with
/// multiplicity.
pub fn newton_slopes(l: &LPolynomial) -> Vec<Ratio<i64>> {
    let d = l.field_deg as i64;
    let points: Vec<(i64, Ratio<i64>)> = l
        .coeffs
        .iter()
        .enumerate()
        .filter_map(|(k, &c)| valuation(c, l.p as i64).map(|v| (k as i64, Ratio::new(v as i64, d))))
        .collect();
    let mut slopes = Vec::new();
    let mut cur = 0;
    while cur + 1 < points.len() {
        let (x0, y0) = points[cur];
        let mut best = cur + 1;
        let mut best_slope = (points[best].1 - y0) / (points[best].0 - x0);
        for (j, &(x, y)) in points.iter().enumerate().skip(cur + 2) {
            let s = (y - y0) / (x - x0);
            if s <= best_slope {
                best = j;
                best_slope = s;
            }
        }
        for _ in 0..(points[best].0 - x0) {
            slopes.push(best_slope);
        }
        cur = best;
    }
    slopes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseType {
    #[serde(rename = "ordinary")]
    Ordinary,
    #[serde(rename = "pRank1")]
    PRank1,
    #[serde(rename = "ssNotSuperspecial")]
    SsNotSuperspecial,
    #[serde(rename = "superspecial")]
    Superspecial,
}

impl CaseType {
    pub const ALL: [CaseType; 4] =
        [CaseType::Ordinary, CaseType::PRank1, CaseType::SsNotSuperspecial, CaseType::Superspecial];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseType::Ordinary => "ordinary",
            CaseType::PRank1 => "pRank1",
            CaseType::SsNotSuperspecial => "ssNotSuperspecial",
            CaseType::Superspecial => "superspecial",
        }
    }

    pub fn parse(s: &str) -> Option<CaseType> {
        CaseType::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for CaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Genus-2 mapping from p-rank to the height of the formal Brauer group.
pub fn height_from_p_rank(p_rank: u32) -> Height {
    match p_rank {
        2 => Height::Finite(1),
        1 => Height::Finite(2),
        _ => Height::Infinite,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationRecord {
    pub genus: u32,
    pub f: Poly,
    pub p_rank: u32,
    pub a_number: u32,
    /// Formal Brauer group height for genus 2; formal group height of the
    /// curve itself for genus 1.
    pub height: Height,
    pub case_type: CaseType,
    pub cartier_manin: Matrix,
    pub l_poly: Option<LPolynomial>,
    pub slopes: Option<Vec<Ratio<i64>>>,
}

impl ClassificationRecord {
    pub fn p(&self) -> u32 {
        self.f.spec().p()
    }

    /// Checks the p-rank / a-number / height / case relations.
    pub fn check_invariants(&self) -> Result<(), String> {
        check_record_fields(self.genus, self.p_rank, self.a_number, self.height, self.case_type)
    }

    pub fn a1(&self) -> Option<i64> {
        self.l_poly.as_ref().map(|l| l.coeffs[1])
    }

    pub fn a2(&self) -> Option<i64> {
        self.l_poly.as_ref().and_then(|l| l.coeffs.get(2).copied().filter(|_| l.genus() == 2))
    }
}

/// Relations every classification row satisfies, by genus.
pub fn check_record_fields(
    genus: u32,
    p_rank: u32,
    a_number: u32,
    height: Height,
    case: CaseType,
) -> Result<(), String> {
    let expected_case = case_for(genus, p_rank, a_number);
    let ok = match genus {
        2 => {
            (p_rank == 2) == (a_number == 0)
                && (p_rank == 2) == (height == Height::Finite(1))
                && (p_rank != 1 || height == Height::Finite(2))
                && (p_rank == 0) == height.is_infinite()
                && (case != CaseType::Superspecial || a_number == 2)
                && p_rank + a_number <= 2
        }
        1 => p_rank + a_number == 1 && height == Height::Finite(2 - p_rank),
        _ => false,
    };
    if ok && expected_case == Some(case) {
        Ok(())
    } else {
        Err(format!(
            "inconsistent record: genus {genus}, p_rank {p_rank}, a_number {a_number}, height {height}, case {case}"
        ))
    }
}

fn case_for(genus: u32, p_rank: u32, a_number: u32) -> Option<CaseType> {
    match (genus, p_rank, a_number) {
        (_, r, _) if r == genus => Some(CaseType::Ordinary),
        (2, 1, _) => Some(CaseType::PRank1),
        (2, 0, 1) => Some(CaseType::SsNotSuperspecial),
        (_, 0, a) if a == genus => Some(CaseType::Superspecial),
        _ => None,
    }
}

/// A curve of either genus handled by the census.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Curve {
    Genus2(Genus2Curve),
    Elliptic(EllipticCurve),
}

impl Curve {
    pub fn genus(&self) -> u32 {
        match self {
            Curve::Genus2(_) => 2,
            Curve::Elliptic(_) => 1,
        }
    }

    /// The right-hand side of `y^2 = f(x)`.
    pub fn rhs(&self) -> Poly {
        match self {
            Curve::Genus2(c) => c.f().clone(),
            Curve::Elliptic(e) => e.cubic(),
        }
    }

    pub fn l_polynomial(&self) -> Result<LPolynomial, CurveError> {
        match self {
            Curve::Genus2(c) => c.l_polynomial(),
            Curve::Elliptic(e) => e.l_polynomial(),
        }
    }

    /// Classifies by the Cartier–Manin route; with `verify`, also computes
    /// the Newton slopes and errors if the two routes disagree.
    pub fn classify(&self, verify: bool) -> Result<ClassificationRecord, CurveError> {
        let genus = self.genus();
        let f = self.rhs();
        let cm = hasse_witt_matrix(&f, genus as usize);
        let p_rank = semilinear_of(&cm).stable_rank() as u32;
        let a_number = genus - cm.rank() as u32;
        let height = match genus {
            2 => height_from_p_rank(p_rank),
            _ => Height::Finite(2 - p_rank),
        };
        let case_type = case_for(genus, p_rank, a_number).expect("stable rank bounded by rank");
        let (l_poly, slopes) = if verify {
            let l = self.l_polynomial()?;
            let slopes = newton_slopes(&l);
            let zero = slopes.iter().filter(|s| **s == Ratio::from_integer(0)).count() as u32;
            let all_half = slopes.iter().all(|s| *s == Ratio::new(1, 2));
            if zero != p_rank || all_half != (p_rank == 0) {
                return Err(CurveError::OracleDisagreement {
                    curve: f.to_string(),
                    cartier_p_rank: p_rank,
                    slopes: slopes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
                });
            }
            (Some(l), Some(slopes))
        } else {
            (None, None)
        };
        Ok(ClassificationRecord { genus, f, p_rank, a_number, height, case_type, cartier_manin: cm, l_poly, slopes })
    }
}

/// JSON form of a record; `height` is null when infinite.
#[derive(Debug, Clone, Serialize)]
pub struct RecordJson {
    pub p: u32,
    pub field_deg: usize,
    pub genus: u32,
    pub f: String,
    pub p_rank: u32,
    pub a_number: u32,
    pub height: Option<u32>,
    pub height_is_infinite: bool,
    pub case: CaseType,
    pub cartier_manin: Matrix,
    pub l_poly: Option<Vec<i64>>,
    pub slopes: Option<Vec<String>>,
}

impl From<&ClassificationRecord> for RecordJson {
    fn from(r: &ClassificationRecord) -> Self {
        RecordJson {
            p: r.p(),
            field_deg: r.f.spec().degree(),
            genus: r.genus,
            f: r.f.to_string(),
            p_rank: r.p_rank,
            a_number: r.a_number,
            height: r.height.finite(),
            height_is_infinite: r.height.is_infinite(),
            case: r.case_type,
            cartier_manin: r.cartier_manin.clone(),
            l_poly: r.l_poly.as_ref().map(|l| l.coeffs.clone()),
            slopes: r.slopes.as_ref().map(|s| s.iter().map(|x| x.to_string()).collect()),
        }
    }
}
