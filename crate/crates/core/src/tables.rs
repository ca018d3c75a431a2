//! Cohomology dimensions `h^j(B_i)`, `h^j(dΩ¹)`, `h^j(Z_i)` and the image
//! dimensions in `H¹(Ω¹)`, keyed by surface type, with cross-identities.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::curves::CaseType;
use crate::dieudonne::h2_model;
use crate::fields::PrimeSpec;
use crate::Height;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("sheaf index must be at least 1, got {0}")]
    BadIndex(u32),
    #[error("unknown surface type {0:?}: expected h1, h2, ssa1 or ssp")]
    UnknownType(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SurfaceType {
    /// Ordinary, `h = 1`.
    H1,
    /// p-rank 1, `h = 2`.
    H2,
    /// Supersingular, not superspecial: `h = ∞, a = 1`.
    HInfA1,
    /// Superspecial: `h = ∞, a = 2`.
    HInfA2,
}

impl SurfaceType {
    pub const ALL: [SurfaceType; 4] = [SurfaceType::H1, SurfaceType::H2, SurfaceType::HInfA1, SurfaceType::HInfA2];

    pub fn as_str(self) -> &'static str {
        match self {
            SurfaceType::H1 => "h1",
            SurfaceType::H2 => "h2",
            SurfaceType::HInfA1 => "ssa1",
            SurfaceType::HInfA2 => "ssp",
        }
    }

    pub fn height(self) -> Height {
        match self {
            SurfaceType::H1 => Height::Finite(1),
            SurfaceType::H2 => Height::Finite(2),
            SurfaceType::HInfA1 | SurfaceType::HInfA2 => Height::Infinite,
        }
    }

    pub fn a_number(self) -> u32 {
        match self {
            SurfaceType::H1 => 0,
            SurfaceType::H2 | SurfaceType::HInfA1 => 1,
            SurfaceType::HInfA2 => 2,
        }
    }

    pub fn case_type(self) -> CaseType {
        match self {
            SurfaceType::H1 => CaseType::Ordinary,
            SurfaceType::H2 => CaseType::PRank1,
            SurfaceType::HInfA1 => CaseType::SsNotSuperspecial,
            SurfaceType::HInfA2 => CaseType::Superspecial,
        }
    }

    pub fn from_case(case: CaseType) -> SurfaceType {
        match case {
            CaseType::Ordinary => SurfaceType::H1,
            CaseType::PRank1 => SurfaceType::H2,
            CaseType::SsNotSuperspecial => SurfaceType::HInfA1,
            CaseType::Superspecial => SurfaceType::HInfA2,
        }
    }
}

impl fmt::Display for SurfaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SurfaceType {
    type Err = TableError;

    fn from_str(s: &str) -> Result<SurfaceType, TableError> {
        SurfaceType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| TableError::UnknownType(s.to_string()))
    }
}

impl Serialize for SurfaceType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// `(h⁰, h¹, h²)`.
pub type Triple = (u32, u32, u32);

pub fn euler_characteristic((h0, h1, h2): Triple) -> i64 {
    h0 as i64 - h1 as i64 + h2 as i64
}

fn check_index(i: u32) -> Result<(), TableError> {
    if i < 1 {
        return Err(TableError::BadIndex(i));
    }
    Ok(())
}

/// `h^j(A, B_i)`.
pub fn dim_b(t: SurfaceType, i: u32) -> Result<Triple, TableError> {
    check_index(i)?;
    Ok(match t {
        // h=1
        SurfaceType::H1 => (0, 0, 0),
        // h=2
        SurfaceType::H2 => (1, 2, 1),
        // h=∞, a=1
        SurfaceType::HInfA1 if i == 1 => (1, 2, 1),
        SurfaceType::HInfA1 => (2, 2 + i, i),
        // h=∞, a=2
        SurfaceType::HInfA2 => (2, 2 + i, i),
    })
}

/// `h^j(A, dΩ¹)`.
pub fn dim_d_omega(t: SurfaceType) -> Triple {
    match t {
        SurfaceType::H1 => (0, 0, 0),
        SurfaceType::H2 => (1, 2, 1),
        SurfaceType::HInfA1 => (1, 2, 1),
        SurfaceType::HInfA2 => (1, 3, 2),
    }
}

/// `h^j(A, Z_i)`.
pub fn dim_z(t: SurfaceType, i: u32) -> Result<Triple, TableError> {
    check_index(i)?;
    Ok(match t {
        // h=1,2
        SurfaceType::H1 | SurfaceType::H2 => (2, 4, 2),
        // h=∞, a=1
        SurfaceType::HInfA1 => (2, 3 + i, 1 + i),
        // h=∞, a=2
        SurfaceType::HInfA2 => (2, 4 + i, 2 + i),
    })
}

/// `h^j(A, Ω¹)` of an abelian surface.
pub const OMEGA1: Triple = (2, 4, 2);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Stated(u32),
    Unstated,
}

impl Dim {
    pub fn stated(self) -> Option<u32> {
        match self {
            Dim::Stated(d) => Some(d),
            Dim::Unstated => None,
        }
    }
}

impl Serialize for Dim {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Dim::Stated(d) => serializer.serialize_u32(*d),
            Dim::Unstated => serializer.serialize_str("unstated"),
        }
    }
}

/// `(dim Im H¹(B_i), dim Im H¹(Z_i))` in `H¹(Ω¹)`.
pub fn image_dims(t: SurfaceType, i: u32) -> Result<(Dim, Dim), TableError> {
    check_index(i)?;
    Ok(match t {
        SurfaceType::H1 => (Dim::Stated(0), Dim::Stated(4)),
        SurfaceType::H2 => (Dim::Stated(1), Dim::Unstated),
        SurfaceType::HInfA1 => (Dim::Stated(1), Dim::Stated(3)),
        SurfaceType::HInfA2 => (Dim::Stated(0), Dim::Stated(4)),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionReport {
    #[serde(rename = "type")]
    pub surface: SurfaceType,
    pub i: u32,
    pub b: Triple,
    pub d_omega: Triple,
    pub z: Triple,
    pub image_b: Dim,
    pub image_z: Dim,
}

pub fn dimension_report(t: SurfaceType, i: u32) -> Result<DimensionReport, TableError> {
    let (image_b, image_z) = image_dims(t, i)?;
    Ok(DimensionReport { surface: t, i, b: dim_b(t, i)?, d_omega: dim_d_omega(t), z: dim_z(t, i)?, image_b, image_z })
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    #[serde(rename = "type")]
    pub surface: SurfaceType,
    pub i: u32,
    pub identity: &'static str,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub rows: Vec<CheckRow>,
}

impl ConsistencyReport {
    pub fn failures(&self) -> Vec<&CheckRow> {
        self.rows.iter().filter(|r| !r.ok).collect()
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }
}

/// Largest `i` covered by [`consistency_check`].
pub const CHECK_MAX_INDEX: u32 = 10;

/// Checks, for every type and `1 <= i <= 10`: vanishing Euler
/// characteristics of `B_i`, `Z_i`, `dΩ¹`; `χ(Z_i) = χ(B_i) + χ(Ω¹)`;
/// `χ(Z_i) = χ(Z_(i+1)) + χ(dΩ¹)`; the orthogonality bound
/// `Im B + Im Z <= 4`; and `h¹(B_i) - h⁰(B_i) = dim ker F` on the
/// length-`i` Dieudonné model.
pub fn consistency_check() -> ConsistencyReport {
    let base = PrimeSpec::prime_field(3).expect("F_3 is supported");
    let mut rows = Vec::new();
    for t in SurfaceType::ALL {
        for i in 1..=CHECK_MAX_INDEX {
            let b = dim_b(t, i).expect("i >= 1");
            let z = dim_z(t, i).expect("i >= 1");
            let z_next = dim_z(t, i + 1).expect("i >= 1");
            let dw = dim_d_omega(t);
            let (ib, iz) = image_dims(t, i).expect("i >= 1");
            let ker_f = h2_model(t.height(), i as usize, base).expect("valid model").ker_f_dim() as i64;
            let mut push = |identity, ok| rows.push(CheckRow { surface: t, i, identity, ok });
            push("chi(B_i) = 0", euler_characteristic(b) == 0);
            push("chi(Z_i) = 0", euler_characteristic(z) == 0);
            push("chi(dOmega1) = 0", euler_characteristic(dw) == 0);
            push(
                "chi(Z_i) = chi(B_i) + chi(Omega1)",
                euler_characteristic(z) == euler_characteristic(b) + euler_characteristic(OMEGA1),
            );
            push(
                "chi(Z_i) = chi(Z_i+1) + chi(dOmega1)",
                euler_characteristic(z) == euler_characteristic(z_next) + euler_characteristic(dw),
            );
            push(
                "dim Im B + dim Im Z <= 4",
                ib.stated().unwrap_or(0) + iz.stated().unwrap_or(0) <= OMEGA1.1,
            );
            push("h1(B_i) - h0(B_i) = dim ker F", b.1 as i64 - b.0 as i64 == ker_f);
        }
    }
    ConsistencyReport { rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_examples() {
        for i in 1..5 {
            assert_eq!(dim_b(SurfaceType::H1, i), Ok((0, 0, 0)));
        }
        assert_eq!(dim_b(SurfaceType::HInfA2, 3), Ok((2, 5, 3)));
        assert_eq!(dim_b(SurfaceType::HInfA1, 1), Ok((1, 2, 1)));
        assert_eq!(dim_b(SurfaceType::H1, 0), Err(TableError::BadIndex(0)));
    }

    #[test]
    fn d_omega_examples() {
        assert_eq!(dim_d_omega(SurfaceType::H1), (0, 0, 0));
        assert_eq!(dim_d_omega(SurfaceType::H2), (1, 2, 1));
        assert_eq!(dim_d_omega(SurfaceType::HInfA2), (1, 3, 2));
    }

    #[test]
    fn z_examples() {
        assert_eq!(dim_z(SurfaceType::H2, 5), Ok((2, 4, 2)));
        assert_eq!(dim_z(SurfaceType::HInfA1, 2), Ok((2, 5, 3)));
        assert_eq!(dim_z(SurfaceType::HInfA2, 1), Ok((2, 5, 3)));
        assert!(dim_z(SurfaceType::H1, 0).is_err());
    }

    #[test]
    fn image_examples() {
        assert_eq!(image_dims(SurfaceType::H1, 2), Ok((Dim::Stated(0), Dim::Stated(4))));
        assert_eq!(image_dims(SurfaceType::H2, 2), Ok((Dim::Stated(1), Dim::Unstated)));
        assert_eq!(image_dims(SurfaceType::HInfA1, 2), Ok((Dim::Stated(1), Dim::Stated(3))));
        assert_eq!(image_dims(SurfaceType::HInfA2, 2), Ok((Dim::Stated(0), Dim::Stated(4))));
    }

    #[test]
    fn consistency_holds() {
        let r = consistency_check();
        assert!(r.passed(), "{:?}", r.failures());
        assert_eq!(r.rows.len(), 4 * CHECK_MAX_INDEX as usize * 7);
        assert_eq!(euler_characteristic(dim_b(SurfaceType::HInfA2, 4).unwrap()), 0);
        assert_eq!(euler_characteristic(dim_z(SurfaceType::HInfA1, 3).unwrap()), 0);
    }

    #[test]
    fn type_names_round_trip() {
        for t in SurfaceType::ALL {
            assert_eq!(t.as_str().parse::<SurfaceType>(), Ok(t));
            assert_eq!(SurfaceType::from_case(t.case_type()), t);
        }
        assert!("h3".parse::<SurfaceType>().is_err());
    }
}
