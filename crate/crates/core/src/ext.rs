//! Extended reals `R ∪ {−∞, +∞}`.
//!
//! Relative entropies, rates and log-masses routinely leave the real line:
//! a support violation makes a divergence `+∞` and a test with zero
//! reference mass has log-value `−∞`. Keeping the infinities symbolic avoids
//! ever producing `0·∞` or `∞ − ∞` by accident.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Maps `±f64::INFINITY` to the symbolic infinities.
    ///
    /// Panics on NaN: a NaN reaching this point is a bug upstream.
    pub fn new(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN cannot be represented as an extended real");
        if x == f64::INFINITY {
            ExtReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }

    /// Natural logarithm of a nonnegative number, `ln 0 = −∞`.
    pub fn ln(x: f64) -> Self {
        assert!(x >= 0.0, "logarithm of negative value {x}");
        if x == 0.0 {
            ExtReal::NegInf
        } else {
            ExtReal::new(x.ln())
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// The value as an `f64`, with infinities mapped to `±f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// Multiplication by a real scalar. Returns `None` instead of forming
    /// `0·(±∞)`.
    pub fn checked_scale(self, c: f64) -> Option<Self> {
        assert!(!c.is_nan());
        match self {
            ExtReal::Finite(x) => Some(ExtReal::new(x * c)),
            _ if c == 0.0 => None,
            ExtReal::PosInf if c > 0.0 => Some(ExtReal::PosInf),
            ExtReal::PosInf => Some(ExtReal::NegInf),
            ExtReal::NegInf if c > 0.0 => Some(ExtReal::NegInf),
            ExtReal::NegInf => Some(ExtReal::PosInf),
        }
    }

    /// Division by a strictly positive real, e.g. a block length.
    pub fn per(self, n: f64) -> Self {
        assert!(n > 0.0, "division by nonpositive {n}");
        self.checked_scale(1.0 / n).expect("positive scale")
    }

    /// Sum, or `None` for the undefined `∞ − ∞`.
    pub fn checked_add(self, other: Self) -> Option<Self> {
        use ExtReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Some(ExtReal::new(a + b)),
            (PosInf, NegInf) | (NegInf, PosInf) => None,
            (PosInf, _) | (_, PosInf) => Some(PosInf),
            (NegInf, _) | (_, NegInf) => Some(NegInf),
        }
    }

    /// Clamp finite values in `[−tol, 0)` to zero; used for quantities that
    /// are nonnegative in exact arithmetic.
    pub fn clamp_nonneg(self, tol: f64) -> Self {
        match self {
            ExtReal::Finite(x) if x < 0.0 && x >= -tol => ExtReal::ZERO,
            other => other,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Absolute distance between two extended reals; infinite unless both
    /// are the same infinity (distance 0) or both finite.
    pub fn distance(self, other: Self) -> f64 {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs(),
            (a, b) if a == b => 0.0,
            _ => f64::INFINITY,
        }
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_f64().total_cmp(&other.to_f64())
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::new(x)
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Finite(x) => ExtReal::Finite(0.0 - x),
            ExtReal::PosInf => ExtReal::NegInf,
        }
    }
}

/// Adding a finite real never hits an undefined form.
impl Add<f64> for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: f64) -> ExtReal {
        self.checked_add(ExtReal::new(rhs)).expect("finite addend")
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("+inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
        }
    }
}

impl std::str::FromStr for ExtReal {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim() {
            "+inf" | "inf" => Ok(ExtReal::PosInf),
            "-inf" => Ok(ExtReal::NegInf),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(ExtReal::Finite)
                .ok_or_else(|| crate::Error::Parse(format!("not an extended real: {other:?}"))),
        }
    }
}

// JSON has no infinities; they travel as the string sentinels "+inf"/"-inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::PosInf => s.serialize_str("+inf"),
            ExtReal::NegInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(ExtReal::new(x)),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_total_and_extends_reals() {
        let mut v = vec![
            ExtReal::PosInf,
            ExtReal::Finite(1.0),
            ExtReal::NegInf,
            ExtReal::Finite(-3.0),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                ExtReal::NegInf,
                ExtReal::Finite(-3.0),
                ExtReal::Finite(1.0),
                ExtReal::PosInf
            ]
        );
    }

    #[test]
    fn zero_times_infinity_is_never_formed() {
        assert_eq!(ExtReal::PosInf.checked_scale(0.0), None);
        assert_eq!(ExtReal::NegInf.checked_scale(0.0), None);
        assert_eq!(ExtReal::NegInf.checked_scale(-2.0), Some(ExtReal::PosInf));
        assert_eq!(ExtReal::PosInf.checked_add(ExtReal::NegInf), None);
        assert_eq!(ExtReal::ln(0.0), ExtReal::NegInf);
    }

    #[test]
    fn json_uses_string_sentinels() {
        let v = vec![ExtReal::PosInf, ExtReal::Finite(0.5), ExtReal::NegInf];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["+inf",0.5,"-inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
