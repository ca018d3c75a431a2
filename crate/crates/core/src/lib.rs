//! Characteristic-`p` invariants of abelian surfaces: Witt vectors and
//! Serre's map, semilinear Frobenius algebra, Cartier–Manin matrices of
//! genus-2 curves, truncated Dieudonné models, formal group heights and
//! the cohomology dimension tables keyed by surface type.

use std::fmt;
use std::str::FromStr;

pub mod census;
pub mod curves;
pub mod dieudonne;
pub mod fields;
pub mod formalgroup;
pub mod semilinear;
pub mod tables;
pub mod witt;

/// Height of a one-dimensional formal group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Height {
    Finite(u32),
    Infinite,
}

impl Height {
    pub fn finite(self) -> Option<u32> {
        match self {
            Height::Finite(h) => Some(h),
            Height::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Height::Infinite
    }
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Finite(h) => write!(f, "{h}"),
            Height::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid height {0:?}: expected a positive integer or \"inf\"")]
pub struct ParseHeightError(String);

impl FromStr for Height {
    type Err = ParseHeightError;

    fn from_str(s: &str) -> Result<Height, ParseHeightError> {
        match s.trim() {
            "inf" | "∞" | "infinity" => Ok(Height::Infinite),
            t => match t.parse::<u32>() {
                Ok(h) if h >= 1 => Ok(Height::Finite(h)),
                _ => Err(ParseHeightError(s.to_string())),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn height_round_trip() {
        for h in [Height::Finite(1), Height::Finite(2), Height::Infinite] {
            assert_eq!(h.to_string().parse::<Height>(), Ok(h));
        }
        assert!("0".parse::<Height>().is_err());
        assert!(Height::Finite(7) < Height::Infinite);
    }
}
