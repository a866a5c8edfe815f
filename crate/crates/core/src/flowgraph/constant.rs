use std::fmt;
use std::ops::{Div, Mul, Neg};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mantissas within this distance of 1 (or 2) are snapped, which makes
/// products like `sqrt(2) * sqrt(2)` or `2 * 1/2` exact dyadics.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// How much a multiplication by a constant costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstantClass {
    /// `+1` or `-1`: the sign is absorbed into an adjacent add.
    Free,
    /// `±2^k` with `k != 0`.
    Shift,
    /// Anything else.
    Mult,
}

/// A nonzero multiplier in normal form `sign * 2^exponent * mantissa` with
/// `mantissa` in `[1, 2)`.
#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(try_from = "RawConstant", into = "RawConstant")]
pub struct ExactConstant {
    negative: bool,
    exponent: i32,
    mantissa: f64,
    unit: bool,
}

#[derive(Serialize, Deserialize)]
struct RawConstant {
    sign: i8,
    k: i32,
    mantissa: f64,
}

impl TryFrom<RawConstant> for ExactConstant {
    type Error = Error;

    fn try_from(raw: RawConstant) -> Result<Self> {
        let negative = match raw.sign {
            1 => false,
            -1 => true,
            _ => return Err(Error::InvalidPlan(format!("constant sign {}", raw.sign))),
        };
        if !(1.0..2.0).contains(&raw.mantissa) {
            return Err(Error::InvalidPlan(format!(
                "mantissa {} outside [1, 2)",
                raw.mantissa
            )));
        }
        Ok(Self::normalized(negative, raw.k, raw.mantissa))
    }
}

impl From<ExactConstant> for RawConstant {
    fn from(c: ExactConstant) -> Self {
        RawConstant {
            sign: if c.negative { -1 } else { 1 },
            k: c.exponent,
            mantissa: c.mantissa,
        }
    }
}

impl ExactConstant {
    pub const ONE: ExactConstant = ExactConstant {
        negative: false,
        exponent: 0,
        mantissa: 1.0,
        unit: true,
    };

    pub const MINUS_ONE: ExactConstant = ExactConstant {
        negative: true,
        exponent: 0,
        mantissa: 1.0,
        unit: true,
    };

    pub const HALF: ExactConstant = ExactConstant {
        negative: false,
        exponent: -1,
        mantissa: 1.0,
        unit: true,
    };

    pub const TWO: ExactConstant = ExactConstant {
        negative: false,
        exponent: 1,
        mantissa: 1.0,
        unit: true,
    };

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value == 0.0 {
            return Err(Error::BadConstant(value));
        }
        let magnitude = value.abs();
        let mut exponent = magnitude.log2().floor() as i32;
        let mut mantissa = magnitude / 2f64.powi(exponent);
        // log2 can land one off near powers of two
        while mantissa >= 2.0 {
            mantissa /= 2.0;
            exponent += 1;
        }
        while mantissa < 1.0 {
            mantissa *= 2.0;
            exponent -= 1;
        }
        Ok(Self::normalized(value < 0.0, exponent, mantissa))
    }

    /// `±2^k` exactly.
    pub fn dyadic(negative: bool, exponent: i32) -> Self {
        Self::normalized(negative, exponent, 1.0)
    }

    fn normalized(negative: bool, mut exponent: i32, mut mantissa: f64) -> Self {
        if mantissa >= 2.0 - UNIT_TOLERANCE {
            mantissa /= 2.0;
            exponent += 1;
        }
        let unit = (mantissa - 1.0).abs() < UNIT_TOLERANCE;
        if unit {
            mantissa = 1.0;
        }
        Self {
            negative,
            exponent,
            mantissa,
            unit,
        }
    }

    pub fn value(&self) -> f64 {
        let v = 2f64.powi(self.exponent) * self.mantissa;
        if self.negative {
            -v
        } else {
            v
        }
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn exponent(&self) -> i32 {
        self.exponent
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    /// True iff the constant is `±2^k`.
    pub fn is_unit(&self) -> bool {
        self.unit
    }

    pub fn is_one(&self) -> bool {
        self.unit && self.exponent == 0 && !self.negative
    }

    pub fn class(&self) -> ConstantClass {
        match (self.unit, self.exponent) {
            (true, 0) => ConstantClass::Free,
            (true, _) => ConstantClass::Shift,
            (false, _) => ConstantClass::Mult,
        }
    }

    pub fn abs(self) -> Self {
        Self {
            negative: false,
            ..self
        }
    }

    pub fn recip(self) -> Self {
        if self.unit {
            Self::dyadic(self.negative, -self.exponent)
        } else {
            Self::normalized(self.negative, -self.exponent - 1, 2.0 / self.mantissa)
        }
    }

    /// Same mantissa up to [`UNIT_TOLERANCE`], i.e. the two constants differ
    /// by a signed power of two.
    pub fn same_mantissa(&self, other: &Self) -> bool {
        (self.mantissa - other.mantissa).abs() < UNIT_TOLERANCE
    }

    /// Numerical equality of the normal forms.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.negative == other.negative
            && self.exponent == other.exponent
            && self.same_mantissa(other)
    }
}

impl Mul for ExactConstant {
    type Output = ExactConstant;

    fn mul(self, rhs: ExactConstant) -> ExactConstant {
        let negative = self.negative != rhs.negative;
        let exponent = self.exponent + rhs.exponent;
        match (self.unit, rhs.unit) {
            (true, true) => Self::dyadic(negative, exponent),
            (true, false) => Self {
                negative,
                exponent,
                ..rhs
            },
            (false, true) => Self {
                negative,
                exponent,
                ..self
            },
            (false, false) => {
                let mut mantissa = self.mantissa * rhs.mantissa;
                let mut exponent = exponent;
                if mantissa >= 2.0 {
                    mantissa /= 2.0;
                    exponent += 1;
                }
                Self::normalized(negative, exponent, mantissa)
            }
        }
    }
}

impl Div for ExactConstant {
    type Output = ExactConstant;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: ExactConstant) -> ExactConstant {
        if self.same_mantissa(&rhs) {
            return Self::dyadic(self.negative != rhs.negative, self.exponent - rhs.exponent);
        }
        self * rhs.recip()
    }
}

impl Neg for ExactConstant {
    type Output = ExactConstant;

    fn neg(self) -> ExactConstant {
        Self {
            negative: !self.negative,
            ..self
        }
    }
}

impl fmt::Debug for ExactConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.negative { "-" } else { "" };
        if self.unit {
            write!(f, "{s}2^{}", self.exponent)
        } else {
            write!(f, "{s}2^{}*{}", self.exponent, self.mantissa)
        }
    }
}

impl fmt::Display for ExactConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.unit {
            let s = if self.negative { "-" } else { "" };
            match self.exponent {
                0 => write!(f, "{s}1"),
                k if k > 0 => write!(f, "{s}{}", 1u64 << k.min(62)),
                k => write!(f, "{s}1/{}", 1u64 << (-k).min(62)),
            }
        } else {
            write!(f, "{:.6}", self.value())
        }
    }
}
