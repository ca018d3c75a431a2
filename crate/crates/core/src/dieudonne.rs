//! Truncated Dieudonné models `D/V^i` of a one-dimensional formal group of
//! height `h`, realised on the basis `e_0, …, e_(i-1)`.
//!
//! `F` is the σ-linear shift `e_j -> e_(j+h-1)` (zero for `h = ∞`), `V` the
//! σ⁻¹-linear shift `e_j -> e_(j+1)`, and `R` drops `e_(i-1)`. `F` is
//! normalised to unit coefficient 1.

use serde::Serialize;
use thiserror::Error;

use crate::fields::{FieldElement, PrimeSpec};
use crate::semilinear::{Matrix, SigmaLinearMap};
use crate::Height;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DieudonneError {
    #[error("model length must be at least 1")]
    ZeroLength,
    #[error("height must be at least 1")]
    ZeroHeight,
    #[error("phi_2 needs a length-2 model, got length {0}")]
    Phi2Length(usize),
    #[error("phi_2 is undefined: F is nonzero on the length-1 quotient (height 1)")]
    Phi2HeightOne,
    #[error("cannot restrict a length-1 model")]
    RestrictLengthOne,
    #[error("i_max = {i_max} is below the height {height}")]
    WindowTooShort { i_max: usize, height: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedDieudonne {
    height: Height,
    len: usize,
    base: &'static PrimeSpec,
}

pub fn h2_model(height: Height, len: usize, base: &'static PrimeSpec) -> Result<TruncatedDieudonne, DieudonneError> {
    if len == 0 {
        return Err(DieudonneError::ZeroLength);
    }
    if height == Height::Finite(0) {
        return Err(DieudonneError::ZeroHeight);
    }
    Ok(TruncatedDieudonne { height, len, base })
}

/// Matrix of `e_j -> e_(j+shift)` on a length-`n` space, or zero.
fn shift_matrix(base: &'static PrimeSpec, rows: usize, cols: usize, shift: Option<usize>) -> Matrix {
    let mut m = Matrix::zero(base, rows, cols);
    if let Some(s) = shift {
        for j in 0..cols {
            if j + s < rows {
                m.set(j + s, j, base.one());
            }
        }
    }
    m
}

impl TruncatedDieudonne {
    pub fn height(&self) -> Height {
        self.height
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn base(&self) -> &'static PrimeSpec {
        self.base
    }

    fn f_shift(&self) -> Option<usize> {
        self.height.finite().map(|h| h as usize - 1)
    }

    pub fn f_matrix(&self) -> Matrix {
        shift_matrix(self.base, self.len, self.len, self.f_shift())
    }

    /// `F` as a σ-linear map.
    pub fn f_map(&self) -> SigmaLinearMap {
        SigmaLinearMap::new(self.f_matrix(), 1).expect("square, twist 1")
    }

    /// Matrix of the σ⁻¹-linear `V` on this model.
    pub fn v_matrix(&self) -> Matrix {
        shift_matrix(self.base, self.len, self.len, Some(1))
    }

    /// `V` from the length `i - 1` model into this one.
    pub fn v_inclusion(&self) -> Matrix {
        shift_matrix(self.base, self.len, self.len - 1, Some(1))
    }

    /// `R`: drops `e_(i-1)`.
    pub fn r_matrix(&self) -> Matrix {
        shift_matrix(self.base, self.len - 1, self.len, Some(0))
    }

    /// Multiplication by `p = FV`: the shift by `h`.
    pub fn p_matrix(&self) -> Matrix {
        shift_matrix(self.base, self.len, self.len, self.height.finite().map(|h| h as usize))
    }

    pub fn apply_f(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        self.f_map().apply(v)
    }

    pub fn apply_v(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        let twisted: Vec<FieldElement> = v.iter().map(|e| e.frobenius(-1)).collect();
        self.v_matrix().mul_vec(&twisted)
    }

    pub fn apply_p(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        self.p_matrix().mul_vec(v)
    }

    pub fn restrict(&self) -> Result<TruncatedDieudonne, DieudonneError> {
        if self.len == 1 {
            return Err(DieudonneError::RestrictLengthOne);
        }
        Ok(TruncatedDieudonne { len: self.len - 1, ..self.clone() })
    }

    pub fn f_is_zero(&self) -> bool {
        self.f_matrix().is_zero()
    }

    pub fn ker_f_dim(&self) -> usize {
        self.f_map().kernel_dim()
    }

    /// `0 -> D_(i-1) -V-> D_i -R^(i-1)-> D_1 -> 0` is exact on dimensions
    /// and ranks.
    pub fn sequence_is_exact(&self) -> bool {
        if self.len == 1 {
            return true;
        }
        let v = self.v_inclusion();
        let mut r_pow = Matrix::identity(self.base, self.len);
        let mut cur = self.clone();
        while cur.len > 1 {
            r_pow = cur.r_matrix().mul(&r_pow).expect("shapes chain");
            cur = cur.restrict().expect("len > 1");
        }
        let composite = r_pow.mul(&v).expect("shapes chain");
        v.rank() == self.len - 1 && r_pow.rank() == 1 && composite.is_zero()
    }
}

pub fn ker_f_dim(m: &TruncatedDieudonne) -> usize {
    m.ker_f_dim()
}

/// The least `i` with `F ≠ 0` on the length-`i` model, or `∞` if `F`
/// vanishes for all `i <= i_max`.
pub fn height_from_models(h_true: Height, i_max: usize, base: &'static PrimeSpec) -> Result<Height, DieudonneError> {
    if let Height::Finite(h) = h_true {
        if (i_max as u64) < h as u64 {
            return Err(DieudonneError::WindowTooShort { i_max, height: h });
        }
    }
    for i in 1..=i_max {
        if !h2_model(h_true, i, base)?.f_is_zero() {
            return Ok(Height::Finite(i as u32));
        }
    }
    Ok(Height::Infinite)
}

/// The σ²-linear map `D_1 ≅ D_2 / V D_1 -> V D_1 ≅ D_1` induced by `F`.
pub fn phi2(m: &TruncatedDieudonne) -> Result<SigmaLinearMap, DieudonneError> {
    if m.len != 2 {
        return Err(DieudonneError::Phi2Length(m.len));
    }
    if !m.restrict()?.f_is_zero() {
        return Err(DieudonneError::Phi2HeightOne);
    }
    let c = m.apply_f(&[m.base.one(), m.base.zero()])[1];
    let matrix = Matrix::from_rows(vec![vec![c]]).expect("1x1");
    Ok(SigmaLinearMap::new(matrix, 2).expect("square, twist 2"))
}

pub fn phi2_vanishes(m: &TruncatedDieudonne) -> Result<bool, DieudonneError> {
    Ok(phi2(m)?.matrix().is_zero())
}

/// Kernel dimension of `F` on the length-`i` model of height `h`:
/// 0 for `h = 1`, 1 for `h = 2`, `i` for `h = ∞`.
pub fn expected_ker_f(height: Height, i: usize) -> usize {
    match height {
        Height::Finite(h) => (h as usize - 1).min(i),
        Height::Infinite => i,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelJson {
    pub height: Option<u32>,
    pub height_is_infinite: bool,
    pub len: usize,
    pub f: Matrix,
    pub v: Matrix,
    /// `dim ker F` on the models of length `1..=len`.
    pub ker_f: Vec<usize>,
    pub phi2_vanishes: Option<bool>,
}

impl From<&TruncatedDieudonne> for ModelJson {
    fn from(m: &TruncatedDieudonne) -> Self {
        let ker_f = (1..=m.len)
            .map(|i| h2_model(m.height, i, m.base).expect("valid").ker_f_dim())
            .collect();
        let at_two = h2_model(m.height, 2, m.base).expect("valid");
        ModelJson {
            height: m.height.finite(),
            height_is_infinite: m.height.is_infinite(),
            len: m.len,
            f: m.f_matrix(),
            v: m.v_matrix(),
            ker_f,
            phi2_vanishes: phi2_vanishes(&at_two).ok(),
        }
    }
}
