//! `sigma^r`-linear maps `v -> M v^(p^r)` on `F_{p^d}^n`.

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::fields::{FieldElement, PrimeSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemilinearError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("twist must be at least 1, got {0}")]
    BadTwist(u32),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("ragged or empty matrix rows")]
    Ragged,
    #[error("entries from different fields")]
    FieldMismatch,
}

/// Dense matrix over a finite field, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    spec: &'static PrimeSpec,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl Matrix {
    pub fn zero(spec: &'static PrimeSpec, rows: usize, cols: usize) -> Matrix {
        Matrix { spec, rows, cols, data: vec![spec.zero(); rows * cols] }
    }

    pub fn identity(spec: &'static PrimeSpec, n: usize) -> Matrix {
        let mut m = Matrix::zero(spec, n, n);
        for i in 0..n {
            m.set(i, i, spec.one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<FieldElement>>) -> Result<Matrix, SemilinearError> {
        let cols = rows.first().map(Vec::len).ok_or(SemilinearError::Ragged)?;
        if cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(SemilinearError::Ragged);
        }
        let spec = rows[0][0].spec();
        if rows.iter().flatten().any(|e| !std::ptr::eq(e.spec(), spec)) {
            return Err(SemilinearError::FieldMismatch);
        }
        let n = rows.len();
        Ok(Matrix { spec, rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_ints(spec: &'static PrimeSpec, rows: &[&[i64]]) -> Result<Matrix, SemilinearError> {
        Matrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&x| spec.from_int(x)).collect()).collect(),
        )
    }

    pub fn spec(&self) -> &'static PrimeSpec {
        self.spec
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        self.data[i * self.cols + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<FieldElement>> {
        self.data.chunks(self.cols).map(<[_]>::to_vec).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(FieldElement::is_zero)
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, SemilinearError> {
        if self.cols != other.rows {
            return Err(SemilinearError::DimensionMismatch(self.cols, other.rows));
        }
        let mut out = Matrix::zero(self.spec, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Entrywise `x -> x^(p^r)`.
    pub fn frobenius(&self, r: i64) -> Matrix {
        Matrix { data: self.data.iter().map(|e| e.frobenius(r)).collect(), ..self.clone() }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zero(self.spec, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(self.spec.zero(), |acc, j| acc + self.get(i, j) * v[j]))
            .collect()
    }

    /// Rank by Gaussian elimination; exact over the field.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            let Some(pivot) = (rank..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            for j in 0..m.cols {
                let (a, b) = (m.get(rank, j), m.get(pivot, j));
                m.set(rank, j, b);
                m.set(pivot, j, a);
            }
            let inv = m.get(rank, col).inverse().expect("pivot is nonzero");
            for r in 0..m.rows {
                if r == rank {
                    continue;
                }
                let factor = m.get(r, col) * inv;
                if factor.is_zero() {
                    continue;
                }
                for j in col..m.cols {
                    let v = m.get(r, j) - factor * m.get(rank, j);
                    m.set(r, j, v);
                }
            }
            rank += 1;
        }
        rank
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .to_rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

/// Serialises as nested arrays of element strings.
impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> =
            self.to_rows().iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect();
        rows.serialize(serializer)
    }
}

/// The map `v -> M * v^(p^twist)` with `v^(p^r)` taken entrywise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaLinearMap {
    matrix: Matrix,
    twist: u32,
}

impl SigmaLinearMap {
    pub fn new(matrix: Matrix, twist: u32) -> Result<Self, SemilinearError> {
        if matrix.rows != matrix.cols {
            return Err(SemilinearError::NotSquare { rows: matrix.rows, cols: matrix.cols });
        }
        if twist == 0 {
            return Err(SemilinearError::BadTwist(twist));
        }
        Ok(SigmaLinearMap { matrix, twist })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn twist(&self) -> u32 {
        self.twist
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn apply(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        let twisted: Vec<FieldElement> = v.iter().map(|e| e.frobenius(self.twist as i64)).collect();
        self.matrix.mul_vec(&twisted)
    }

    /// `self ∘ other`: matrix `M_f * M_g^(p^(r_f))`, twist `r_f + r_g`.
    pub fn compose(&self, other: &SigmaLinearMap) -> Result<SigmaLinearMap, SemilinearError> {
        if self.dim() != other.dim() {
            return Err(SemilinearError::DimensionMismatch(self.dim(), other.dim()));
        }
        if !std::ptr::eq(self.matrix.spec, other.matrix.spec) {
            return Err(SemilinearError::FieldMismatch);
        }
        let matrix = self.matrix.mul(&other.matrix.frobenius(self.twist as i64))?;
        Ok(SigmaLinearMap { matrix, twist: self.twist + other.twist })
    }

    /// `self` composed with itself `k >= 1` times.
    pub fn iterate(&self, k: usize) -> SigmaLinearMap {
        assert!(k >= 1);
        let mut acc = self.clone();
        for _ in 1..k {
            acc = self.compose(&acc).expect("same dimension");
        }
        acc
    }

    /// Dimension of `{v : M v^(p^r) = 0}`; equals the corank of `M` because
    /// Frobenius is bijective on a finite field.
    pub fn kernel_dim(&self) -> usize {
        self.dim() - self.matrix.rank()
    }

    /// Rank of the `dim`-fold composite, which has stabilised by then.
    pub fn stable_rank(&self) -> usize {
        self.iterate(self.dim().max(1)).matrix.rank()
    }

    /// The same map over a larger field `F_{p^e}` with `d | e`.
    pub fn base_change(&self, target: &'static PrimeSpec) -> Result<SigmaLinearMap, SemilinearError> {
        let emb = crate::fields::Embedding::new(self.matrix.spec, target)
            .map_err(|_| SemilinearError::FieldMismatch)?;
        let data = self.matrix.data.iter().map(|&e| emb.apply(e)).collect();
        let matrix = Matrix { spec: target, data, ..self.matrix.clone() };
        Ok(SigmaLinearMap { matrix, twist: self.twist })
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

    fn map(rows: &[&[i64]], twist: u32) -> SigmaLinearMap {
        SigmaLinearMap::new(Matrix::from_ints(f3(), rows).unwrap(), twist).unwrap()
    }

    #[test]
    fn compose_with_identity_twists_the_other_matrix() {
        let f9 = PrimeSpec::extension(3, 2).unwrap();
        let t = f9.generator();
        let g = SigmaLinearMap::new(
            Matrix::from_rows(vec![vec![t, f9.one()], vec![f9.zero(), t + f9.one()]]).unwrap(),
            2,
        )
        .unwrap();
        let id = SigmaLinearMap::new(Matrix::identity(f9, 2), 1).unwrap();
        let c = id.compose(&g).unwrap();
        assert_eq!(c.twist(), 3);
        assert_eq!(c.matrix(), &g.matrix().frobenius(1));
    }

    #[test]
    fn compose_over_prime_field_multiplies() {
        let f = map(&[&[1, 2], &[0, 1]], 1);
        let c = f.compose(&f).unwrap();
        assert_eq!(c.twist(), 2);
        assert_eq!(c.matrix(), &f.matrix().mul(f.matrix()).unwrap());
    }

    #[test]
    fn nilpotent_squares_to_zero() {
        let f = map(&[&[0, 0], &[1, 0]], 1);
        let c = f.compose(&f).unwrap();
        assert!(c.matrix().is_zero());
        assert_eq!(c.twist(), 2);
    }

    #[test]
    fn compose_dimension_mismatch() {
        let f = map(&[&[1, 0], &[0, 1]], 1);
        let g = map(&[&[1]], 1);
        assert_eq!(f.compose(&g), Err(SemilinearError::DimensionMismatch(2, 1)));
    }

    #[test]
    fn construction_errors() {
        let m = Matrix::from_ints(f3(), &[&[1, 0]]).unwrap();
        assert_eq!(SigmaLinearMap::new(m, 1), Err(SemilinearError::NotSquare { rows: 1, cols: 2 }));
        let m = Matrix::identity(f3(), 2);
        assert_eq!(SigmaLinearMap::new(m, 0), Err(SemilinearError::BadTwist(0)));
    }

    #[test]
    fn kernel_dims() {
        assert_eq!(map(&[&[0, 0], &[0, 0]], 1).kernel_dim(), 2);
        assert_eq!(map(&[&[1, 1], &[0, 2]], 1).kernel_dim(), 0);
        assert_eq!(map(&[&[1, 0], &[1, 0]], 1).kernel_dim(), 1);
    }

    #[test]
    fn stable_ranks() {
        assert_eq!(map(&[&[1, 1], &[0, 2]], 1).stable_rank(), 2);
        assert_eq!(map(&[&[0, 0], &[1, 0]], 1).stable_rank(), 0);
        assert_eq!(map(&[&[1, 0], &[1, 0]], 1).stable_rank(), 1);
    }

    /// Vectors killed by some iterate, found by enumerating `F_q^n`.
    fn brute_force_nilspace_dim(f: &SigmaLinearMap) -> usize {
        let spec = f.matrix().spec();
        let n = f.dim();
        let q = spec.order();
        let total = q.pow(n as u32);
        let mut killed = 0u64;
        for code in 0..total {
            let mut v: Vec<FieldElement> =
                (0..n).map(|i| spec.from_index(code / q.pow(i as u32) % q)).collect();
            for _ in 0..n {
                v = f.apply(&v);
            }
            if v.iter().all(FieldElement::is_zero) {
                killed += 1;
            }
        }
        let mut dim = 0;
        while q.pow(dim as u32) < killed {
            dim += 1;
        }
        assert_eq!(q.pow(dim as u32), killed, "nilspace is a subspace");
        dim
    }

    fn random_map(spec: &'static PrimeSpec, n: usize, rng: &mut ChaCha8Rng, sparse: bool) -> SigmaLinearMap {
        let rows = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let e = spec.random(rng);
                        if sparse && rand::Rng::gen_bool(rng, 0.5) { spec.zero() } else { e }
                    })
                    .collect()
            })
            .collect();
        SigmaLinearMap::new(Matrix::from_rows(rows).unwrap(), 1).unwrap()
    }

    #[test]
    fn stable_rank_matches_brute_force_nilspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (p, d, n) in [(3, 1, 3), (3, 2, 2), (5, 1, 3), (3, 2, 3)] {
            let spec = PrimeSpec::extension(p, d).unwrap();
            for _ in 0..15 {
                let f = random_map(spec, n, &mut rng, true);
                assert_eq!(f.stable_rank(), n - brute_force_nilspace_dim(&f), "{f:?}");
            }
        }
    }

    #[test]
    fn stable_rank_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for (p, d) in [(3, 1), (3, 2), (5, 2), (7, 1)] {
            let spec = PrimeSpec::extension(p, d).unwrap();
            let bigger = PrimeSpec::extension(p, 2 * d).unwrap();
            for n in 1..=4 {
                for _ in 0..10 {
                    let f = random_map(spec, n, &mut rng, true);
                    assert_eq!(f.stable_rank(), f.compose(&f).unwrap().stable_rank());
                    assert_eq!(f.stable_rank(), f.base_change(bigger).unwrap().stable_rank());
                    assert_eq!(f.kernel_dim() + f.matrix().rank(), n);
                }
            }
        }
    }
}
