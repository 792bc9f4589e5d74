//! Commutative semirings with a partial Kleene star.
//!
//! Three carriers are supported, selected by [`SemiringId`]:
//!
//! | name       | carrier              | ⊕    | ⊗   | 0̄   | 1̄ |
//! |------------|----------------------|------|-----|------|----|
//! | `boolean`  | {0, 1}               | or   | and | 0    | 1  |
//! | `real`     | nonnegative reals    | +    | ×   | 0    | 1  |
//! | `tropical` | reals ∪ {+∞}         | min  | +   | +∞   | 0  |
//!
//! A [`Weight`] carries its semiring tag. Combining weights of different
//! semirings through [`Weight::plus`]/[`Weight::times`] is an error; the
//! `+`/`*` operators panic instead and are meant for code whose inputs were
//! validated to share a semiring.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use thiserror::Error;

/// Relative tolerance for real-valued weight comparison.
pub const REAL_REL_TOL: f64 = 1e-9;
/// Absolute floor for real-valued weight comparison.
pub const REAL_ABS_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemiringId {
    Boolean,
    Real,
    Tropical,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SemiringError {
    #[error("semiring mismatch: {0} vs {1}")]
    Mismatch(SemiringId, SemiringId),
    #[error("`{text}` is not a {semiring} weight")]
    InvalidWeight { semiring: SemiringId, text: String },
    #[error("unknown semiring `{0}` (expected boolean, real or tropical)")]
    Unknown(String),
}

/// The infinite sum ⨁ aⁱ has no value in the carrier.
#[derive(Clone, Copy, Debug, PartialEq, Error)]
#[error("Kleene star of {0} diverges")]
pub struct Divergent(pub Weight);

impl SemiringId {
    pub const ALL: [SemiringId; 3] = [SemiringId::Boolean, SemiringId::Real, SemiringId::Tropical];

    pub fn name(self) -> &'static str {
        match self {
            SemiringId::Boolean => "boolean",
            SemiringId::Real => "real",
            SemiringId::Tropical => "tropical",
        }
    }

    pub fn zero(self) -> Weight {
        match self {
            SemiringId::Boolean => Weight::Boolean(false),
            SemiringId::Real => Weight::Real(0.0),
            SemiringId::Tropical => Weight::Tropical(f64::INFINITY),
        }
    }

    pub fn one(self) -> Weight {
        match self {
            SemiringId::Boolean => Weight::Boolean(true),
            SemiringId::Real => Weight::Real(1.0),
            SemiringId::Tropical => Weight::Tropical(0.0),
        }
    }

    /// Builds a weight of this semiring from a number, checking the carrier.
    ///
    /// Booleans accept exactly `0` and `1`.
    pub fn weight(self, value: f64) -> Result<Weight, SemiringError> {
        let invalid = || SemiringError::InvalidWeight {
            semiring: self,
            text: value.to_string(),
        };
        match self {
            SemiringId::Boolean if value == 0.0 => Ok(Weight::Boolean(false)),
            SemiringId::Boolean if value == 1.0 => Ok(Weight::Boolean(true)),
            SemiringId::Boolean => Err(invalid()),
            SemiringId::Real if value.is_finite() && value >= 0.0 => Ok(Weight::Real(value)),
            SemiringId::Real => Err(invalid()),
            SemiringId::Tropical if value.is_nan() || value == f64::NEG_INFINITY => Err(invalid()),
            SemiringId::Tropical => Ok(Weight::Tropical(value)),
        }
    }

    /// Parses the textual form used in grammar and automaton files: a
    /// decimal, a fraction `p/q`, or `inf`. Boolean also takes `true` and
    /// `false`, and reads any other number by its support (nonzero is true).
    pub fn parse_weight(self, text: &str) -> Result<Weight, SemiringError> {
        let invalid = || SemiringError::InvalidWeight {
            semiring: self,
            text: text.to_string(),
        };
        let number = |t: &str| -> Option<f64> {
            match t {
                "inf" | "+inf" | "∞" | "+∞" => Some(f64::INFINITY),
                _ => match t.split_once('/') {
                    Some((p, q)) => Some(p.parse::<f64>().ok()? / q.parse::<f64>().ok()?),
                    None => t.parse::<f64>().ok(),
                },
            }
        };
        match (self, text) {
            (SemiringId::Boolean, "true") => Ok(Weight::Boolean(true)),
            (SemiringId::Boolean, "false") => Ok(Weight::Boolean(false)),
            (SemiringId::Boolean, _) => match number(text) {
                Some(x) if x.is_finite() && x >= 0.0 => Ok(Weight::Boolean(x != 0.0)),
                _ => Err(invalid()),
            },
            _ => {
                let value = number(text).filter(|x| !x.is_nan()).ok_or_else(invalid)?;
                self.weight(value).map_err(|_| invalid())
            }
        }
    }

    /// ⨁ of a finite sequence; 0̄ when empty.
    pub fn sum<I: IntoIterator<Item = Weight>>(self, weights: I) -> Weight {
        weights.into_iter().fold(self.zero(), |acc, w| acc + w)
    }

    /// ⨂ of a finite sequence; 1̄ when empty.
    pub fn product<I: IntoIterator<Item = Weight>>(self, weights: I) -> Weight {
        weights.into_iter().fold(self.one(), |acc, w| acc * w)
    }
}

impl fmt::Display for SemiringId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SemiringId {
    type Err = SemiringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "boolean" => Ok(SemiringId::Boolean),
            "real" => Ok(SemiringId::Real),
            "tropical" => Ok(SemiringId::Tropical),
            other => Err(SemiringError::Unknown(other.to_string())),
        }
    }
}

/// An element of one of the supported semirings.
///
/// `PartialEq` is exact. Use [`Weight::approx_eq`] for semiring equality,
/// which tolerates floating-point rounding on real and finite tropical values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    Boolean(bool),
    Real(f64),
    Tropical(f64),
}

impl Weight {
    pub fn semiring(&self) -> SemiringId {
        match self {
            Weight::Boolean(_) => SemiringId::Boolean,
            Weight::Real(_) => SemiringId::Real,
            Weight::Tropical(_) => SemiringId::Tropical,
        }
    }

    fn check(&self, other: &Weight) -> Result<(), SemiringError> {
        if self.semiring() == other.semiring() {
            Ok(())
        } else {
            Err(SemiringError::Mismatch(self.semiring(), other.semiring()))
        }
    }

    pub fn plus(&self, other: &Weight) -> Result<Weight, SemiringError> {
        self.check(other)?;
        Ok(match (*self, *other) {
            (Weight::Boolean(a), Weight::Boolean(b)) => Weight::Boolean(a || b),
            (Weight::Real(a), Weight::Real(b)) => Weight::Real(a + b),
            (Weight::Tropical(a), Weight::Tropical(b)) => Weight::Tropical(a.min(b)),
            _ => unreachable!(),
        })
    }

    pub fn times(&self, other: &Weight) -> Result<Weight, SemiringError> {
        self.check(other)?;
        Ok(match (*self, *other) {
            (Weight::Boolean(a), Weight::Boolean(b)) => Weight::Boolean(a && b),
            (Weight::Real(a), Weight::Real(b)) => Weight::Real(a * b),
            // +∞ + x stays +∞ for every x in the carrier, so 0̄ annihilates.
            (Weight::Tropical(a), Weight::Tropical(b)) => Weight::Tropical(a + b),
            _ => unreachable!(),
        })
    }

    /// ⨁_{i≥0} selfⁱ, or [`Divergent`] when the series has no value.
    pub fn star(&self) -> Result<Weight, Divergent> {
        match *self {
            Weight::Boolean(_) => Ok(Weight::Boolean(true)),
            Weight::Real(a) if a < 1.0 => Ok(Weight::Real(1.0 / (1.0 - a))),
            Weight::Tropical(a) if a >= 0.0 => Ok(Weight::Tropical(0.0)),
            _ => Err(Divergent(*self)),
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == self.semiring().zero()
    }

    pub fn is_one(&self) -> bool {
        *self == self.semiring().one()
    }

    /// The value as a float: booleans map to 0/1.
    pub fn value(&self) -> f64 {
        match *self {
            Weight::Boolean(b) => f64::from(u8::from(b)),
            Weight::Real(x) | Weight::Tropical(x) => x,
        }
    }

    /// Semiring equality at the default tolerance.
    pub fn approx_eq(&self, other: &Weight) -> bool {
        match (*self, *other) {
            (Weight::Boolean(a), Weight::Boolean(b)) => a == b,
            (Weight::Real(a), Weight::Real(b)) | (Weight::Tropical(a), Weight::Tropical(b)) => {
                close(a, b, REAL_REL_TOL, REAL_ABS_TOL)
            }
            _ => false,
        }
    }

    /// Equality within a caller-chosen tolerance, relative for magnitudes
    /// above one and absolute below.
    pub fn within(&self, other: &Weight, tol: f64) -> bool {
        match (*self, *other) {
            (Weight::Boolean(a), Weight::Boolean(b)) => a == b,
            (Weight::Real(a), Weight::Real(b)) | (Weight::Tropical(a), Weight::Tropical(b)) => {
                close(a, b, tol, tol)
            }
            _ => false,
        }
    }
}

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    if a == b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    (a - b).abs() <= abs.max(rel * a.abs().max(b.abs()))
}

impl Add for Weight {
    type Output = Weight;

    /// Panics on a semiring mismatch.
    fn add(self, rhs: Weight) -> Weight {
        self.plus(&rhs).expect("weights from different semirings")
    }
}

impl Mul for Weight {
    type Output = Weight;

    /// Panics on a semiring mismatch.
    fn mul(self, rhs: Weight) -> Weight {
        self.times(&rhs).expect("weights from different semirings")
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Weight::Boolean(b) => write!(f, "{}", u8::from(b)),
            Weight::Real(x) => write!(f, "{x}"),
            Weight::Tropical(x) if x == f64::INFINITY => f.write_str("inf"),
            Weight::Tropical(x) => write!(f, "{x}"),
        }
    }
}
