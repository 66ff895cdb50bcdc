//! Exact rational numbers, the extended value lattice `Q ∪ {+∞}`, and the
//! `"p/q"` text encoding used by every JSON document in this crate.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"7"`, `"-3/4"` or `" 10 / 4 "`. Zero denominators are rejected.
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| format!("invalid rational {s:?}"))?;
    let den = BigInt::from_str(den).map_err(|_| format!("invalid rational {s:?}"))?;
    if den.is_zero() {
        return Err(format!("invalid rational {s:?}: zero denominator"));
    }
    Ok(Q::new(num, den))
}

/// Canonical text form: integers without a slash, everything else as `p/q`.
pub fn format_q(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn q_to_f64(v: &Q) -> f64 {
    match (v.numer().to_f64(), v.denom().to_f64()) {
        (Some(n), Some(d)) => n / d,
        _ => f64::NAN,
    }
}

pub fn floor_to_bigint(v: &Q) -> BigInt {
    v.numer().div_floor(v.denom())
}

pub fn ceil_to_bigint(v: &Q) -> BigInt {
    v.numer().div_ceil(v.denom())
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Q>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// A point of the extended lattice `Q ∪ {+∞}` with the obvious total order.
///
/// `+∞` marks infeasibility (no admissible policy for a scenario) and is never
/// encoded as a large finite number.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Finite(Q),
    Infinite,
}

impl Value {
    pub fn finite(v: Q) -> Self {
        Value::Finite(v)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Value::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&Q> {
        match self {
            Value::Finite(v) => Some(v),
            Value::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Finite(v) => q_to_f64(v),
            Value::Infinite => f64::INFINITY,
        }
    }

    /// Decimal rendering for `--float` output.
    pub fn to_float_string(&self) -> String {
        match self {
            Value::Finite(v) => format!("{}", q_to_f64(v)),
            Value::Infinite => "inf".to_string(),
        }
    }
}

impl From<Q> for Value {
    fn from(v: Q) -> Self {
        Value::Finite(v)
    }
}

impl PartialEq<Q> for Value {
    fn eq(&self, other: &Q) -> bool {
        matches!(self, Value::Finite(v) if v == other)
    }
}

impl PartialOrd<Q> for Value {
    fn partial_cmp(&self, other: &Q) -> Option<Ordering> {
        Some(match self {
            Value::Finite(v) => v.cmp(other),
            Value::Infinite => Ordering::Greater,
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(v) => f.write_str(&format_q(v)),
            Value::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Finite(v) => s.serialize_str(&format_q(v)),
            Value::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Num::deserialize(d)?;
        match raw.0 {
            Some(v) => Ok(Value::Finite(v)),
            None => Ok(Value::Infinite),
        }
    }
}

/// Deserialization helper: integer JSON number, `"p/q"` string, or `"inf"`
/// (the latter only where a [`Value`] is expected).
struct Num(Option<Q>);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct NumVisitor;
        impl Visitor<'_> for NumVisitor {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or a \"p/q\" rational string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(Some(q(v))))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(Some(Q::from_integer(BigInt::from(v)))))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Err(E::custom(format!(
                    "floating-point number {v} not allowed; use an integer or \"p/q\""
                )))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                if v.trim() == "inf" {
                    return Ok(Num(None));
                }
                parse_q(v).map(|x| Num(Some(x))).map_err(E::custom)
            }
        }
        d.deserialize_any(NumVisitor)
    }
}

fn finite<E: de::Error>(n: Num) -> Result<Q, E> {
    n.0.ok_or_else(|| E::custom("infinite value not allowed here"))
}

fn ser_scalar<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
    if v.is_integer() {
        if let Some(i) = v.numer().to_i64() {
            return s.serialize_i64(i);
        }
    }
    s.serialize_str(&format_q(v))
}

/// `#[serde(with = "...")]` adapters for rationals in JSON documents.
pub mod serde_q {
    use super::*;
    use serde::ser::SerializeSeq;

    pub mod scalar {
        use super::*;
        pub fn serialize<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
            ser_scalar(v, s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
            finite(Num::deserialize(d)?)
        }
    }

    struct Ser<'a>(&'a Q);
    impl Serialize for Ser<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            ser_scalar(self.0, s)
        }
    }

    struct Wrapped(Q);
    impl<'de> Deserialize<'de> for Wrapped {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            finite(Num::deserialize(d)?).map(Wrapped)
        }
    }

    pub mod vec {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&Ser(x))?;
            }
            seq.end()
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
            let raw = Vec::<Wrapped>::deserialize(d)?;
            Ok(raw.into_iter().map(|w| w.0).collect())
        }
    }

    pub mod vecvec {
        use super::*;

        struct Row<'a>(&'a [Q]);
        impl Serialize for Row<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                super::vec::serialize(self.0, s)
            }
        }

        pub fn serialize<S: Serializer>(v: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for row in v {
                seq.serialize_element(&Row(row))?;
            }
            seq.end()
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Q>>, D::Error> {
            let raw = Vec::<Vec<Wrapped>>::deserialize(d)?;
            Ok(raw
                .into_iter()
                .map(|r| r.into_iter().map(|w| w.0).collect())
                .collect())
        }
    }
}
