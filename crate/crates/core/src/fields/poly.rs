use std::fmt;

use thiserror::Error;

use super::{FieldElement, PrimeSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyParseError {
    #[error("empty polynomial string")]
    Empty,
    #[error("cannot parse term `{0}`")]
    BadTerm(String),
    #[error("cannot parse coefficient `{0}`")]
    BadCoefficient(String),
}

/// Dense univariate polynomial over a finite field. Coefficients are
/// stored low to high with no trailing zeros; the zero polynomial has no
/// coefficients and degree `None`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    spec: &'static PrimeSpec,
    coeffs: Vec<FieldElement>,
}

impl Poly {
    pub fn zero(spec: &'static PrimeSpec) -> Poly {
        Poly { spec, coeffs: Vec::new() }
    }

    pub fn new(spec: &'static PrimeSpec, coeffs: Vec<FieldElement>) -> Poly {
        let mut out = Poly { spec, coeffs };
        out.trim();
        out
    }

    /// From integer coefficients, low to high.
    pub fn from_ints(spec: &'static PrimeSpec, coeffs: &[i64]) -> Poly {
        Poly::new(spec, coeffs.iter().map(|&c| spec.from_int(c)).collect())
    }

    pub fn monomial(c: FieldElement, k: usize) -> Poly {
        let mut coeffs = vec![c.spec().zero(); k + 1];
        coeffs[k] = c;
        Poly::new(c.spec(), coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn spec(&self) -> &'static PrimeSpec {
        self.spec
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> FieldElement {
        self.coeffs.get(k).copied().unwrap_or_else(|| self.spec.zero())
    }

    pub fn leading(&self) -> Option<FieldElement> {
        self.coeffs.last().copied()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(self.spec, (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(self.spec, (0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn scale(&self, c: FieldElement) -> Poly {
        Poly::new(self.spec, self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.spec);
        }
        let mut out = vec![self.spec.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Poly::new(self.spec, out)
    }

    /// `self^e` by square-and-multiply.
    pub fn pow(&self, mut e: u64) -> Poly {
        let mut acc = Poly::from_ints(self.spec, &[1]);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.spec,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * self.spec.from_int(k as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: FieldElement) -> FieldElement {
        self.coeffs.iter().rev().fold(self.spec.zero(), |acc, &c| acc * x + c)
    }

    /// Quotient and remainder; panics if `divisor` is zero.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("polynomial division by zero");
        let lead_inv = divisor.coeffs[dd].inverse().expect("nonzero leading coefficient");
        let mut rem = self.coeffs.clone();
        let mut quot = vec![self.spec.zero(); rem.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let top = rem.len() - 1;
            let c = rem[top] * lead_inv;
            if !c.is_zero() {
                quot[top - dd] = c;
                for (j, &b) in divisor.coeffs.iter().enumerate() {
                    rem[top - dd + j] = rem[top - dd + j] - c * b;
                }
            }
            rem.pop();
        }
        (Poly::new(self.spec, quot), Poly::new(self.spec, rem))
    }

    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some(l) => self.scale(l.inverse().expect("leading coefficient is nonzero")),
            None => self.clone(),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `gcd(f, f') = 1`.
    pub fn is_squarefree(&self) -> bool {
        !self.is_zero() && self.gcd(&self.derivative()).degree() == Some(0)
    }

    /// Parses the canonical ASCII form, e.g. `x^5+2*x^2+1`. Coefficients are
    /// integers reduced mod `p`, or parenthesised elements in `t` such as
    /// `(t+1)*x^2` for extension fields. Repeated degrees accumulate.
    pub fn parse(spec: &'static PrimeSpec, s: &str) -> Result<Poly, PolyParseError> {
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(PolyParseError::Empty);
        }
        let mut coeffs: Vec<FieldElement> = Vec::new();
        for term in split_top_level(&cleaned) {
            if term.is_empty() {
                return Err(PolyParseError::BadTerm(cleaned.clone()));
            }
            let (coeff, k) = parse_term(spec, term)?;
            if coeffs.len() <= k {
                coeffs.resize(k + 1, spec.zero());
            }
            coeffs[k] = coeffs[k] + coeff;
        }
        Ok(Poly::new(spec, coeffs))
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_term(spec: &'static PrimeSpec, term: &str) -> Result<(FieldElement, usize), PolyParseError> {
    let bad = || PolyParseError::BadTerm(term.to_string());
    let (coeff_part, mono_part) = match term.rfind('x') {
        None => (Some(term), None),
        Some(pos) => {
            let head = &term[..pos];
            let coeff = match head {
                "" => None,
                h => Some(h.strip_suffix('*').ok_or_else(bad)?),
            };
            (coeff, Some(&term[pos + 1..]))
        }
    };
    let coeff = match coeff_part {
        None => spec.one(),
        Some(c) => parse_coeff(spec, c)?,
    };
    let k = match mono_part {
        None => 0,
        Some("") => 1,
        Some(rest) => rest
            .strip_prefix('^')
            .and_then(|e| e.parse::<usize>().ok())
            .ok_or_else(bad)?,
    };
    Ok((coeff, k))
}

fn parse_coeff(spec: &'static PrimeSpec, c: &str) -> Result<FieldElement, PolyParseError> {
    let bad = || PolyParseError::BadCoefficient(c.to_string());
    if let Some(inner) = c.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let mut acc = spec.zero();
        for term in inner.split('+') {
            let (coeff, k) = match term.find('t') {
                None => (term, 0),
                Some(pos) => {
                    let head = match &term[..pos] {
                        "" => "1",
                        h => h.strip_suffix('*').ok_or_else(bad)?,
                    };
                    let k = match &term[pos + 1..] {
                        "" => 1,
                        rest => rest
                            .strip_prefix('^')
                            .and_then(|e| e.parse::<usize>().ok())
                            .ok_or_else(bad)?,
                    };
                    (head, k)
                }
            };
            let value: i64 = coeff.parse().map_err(|_| bad())?;
            let t_pow = spec.generator().pow(k as u64);
            let t_pow = if spec.degree() == 1 && k > 0 { spec.zero() } else { t_pow };
            acc = acc + spec.from_int(value) * t_pow;
        }
        return Ok(acc);
    }
    let value: i64 = c.parse().map_err(|_| bad())?;
    Ok(spec.from_int(value))
}

impl fmt::Display for Poly {
    /// Canonical form: descending degree, `c*x^k` terms joined by `+`,
    /// unit coefficients omitted on non-constant terms, `0` for zero.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{k}"),
            };
            terms.push(if k == 0 {
                c.to_string()
            } else if c.is_one() {
                mono
            } else {
                format!("{c}*{mono}")
            });
        }
        f.write_str(&terms.join("+"))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32) -> &'static PrimeSpec {
        PrimeSpec::prime_field(p).unwrap()
    }

    #[test]
    fn binomial_square() {
        let g = Poly::parse(f(3), "x+1").unwrap();
        assert_eq!(g.pow(2).to_string(), "x^2+2*x+1");
    }

    #[test]
    fn first_power_is_identity() {
        let g = Poly::parse(f(3), "x^5+1").unwrap();
        assert_eq!(g.pow(1), g);
    }

    #[test]
    fn square_of_cubic_over_f5() {
        let g = Poly::parse(f(5), "x^3+x").unwrap();
        // oracle: schoolbook product computed by hand, (x^3+x)(x^3+x)
        assert_eq!(g.pow(2), Poly::from_ints(f(5), &[0, 0, 1, 0, 2, 0, 1]));
        assert_eq!(g.pow(2).to_string(), "x^6+2*x^4+x^2");
    }

    #[test]
    fn canonical_round_trip() {
        for s in ["x^5+x^2+1", "2*x^6+x+2", "x", "0", "4*x^3+3"] {
            let spec = f(5);
            assert_eq!(Poly::parse(spec, s).unwrap().to_string(), s);
        }
        let g = Poly::parse(f(3), "7*x^2 + 3*x + 5").unwrap();
        assert_eq!(g.to_string(), "x^2+2");
    }

    #[test]
    fn extension_coefficients_round_trip() {
        let spec = PrimeSpec::extension(3, 2).unwrap();
        let g = Poly::parse(spec, "(t+1)*x^2+(2*t)*x+1").unwrap();
        assert_eq!(g.to_string(), "(t+1)*x^2+(2*t)*x+1");
    }

    #[test]
    fn parse_errors() {
        assert_eq!(Poly::parse(f(3), ""), Err(PolyParseError::Empty));
        assert!(Poly::parse(f(3), "x^^2").is_err());
        assert!(Poly::parse(f(3), "2x").is_err());
        assert!(Poly::parse(f(3), "x^2++1").is_err());
    }

    #[test]
    fn zero_polynomial_has_no_degree() {
        assert_eq!(Poly::zero(f(3)).degree(), None);
        assert_eq!(Poly::from_ints(f(3), &[3, 6]).degree(), None);
    }

    #[test]
    fn squarefree_detection() {
        assert!(Poly::parse(f(3), "x^5+1").unwrap().is_squarefree());
        // (x+1)^2 (x^3 + ...)
        let sq = Poly::parse(f(5), "x+1").unwrap().pow(2).mul(&Poly::parse(f(5), "x^3+x+1").unwrap());
        assert!(!sq.is_squarefree());
        // x^3 over F_3 has derivative zero
        assert!(!Poly::parse(f(3), "x^3+1").unwrap().is_squarefree());
    }

    #[test]
    fn division_identity() {
        let a = Poly::parse(f(7), "3*x^6+x^4+5*x+2").unwrap();
        let b = Poly::parse(f(7), "2*x^2+x+1").unwrap();
        let (q, r) = a.div_rem(&b);
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.degree().unwrap_or(0) < 2);
    }
}
