//! Scalar payloads stored in tensors and produced by plans.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Num(f64),
    Bool(bool),
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Num(v) => v,
            Value::Bool(b) => b as u8 as f64,
        }
    }

    pub fn truthy(self) -> bool {
        match self {
            Value::Num(v) => v != 0.0,
            Value::Bool(b) => b,
        }
    }

    pub fn is_bool(self) -> bool {
        matches!(self, Value::Bool(_))
    }

    pub fn is_nan(self) -> bool {
        matches!(self, Value::Num(v) if v.is_nan())
    }

    /// Zero of the same type as `self`.
    pub fn zero_like(self) -> Value {
        match self {
            Value::Num(_) => Value::Num(0.0),
            Value::Bool(_) => Value::Bool(false),
        }
    }

    /// Equality where numbers and booleans compare by numeric value.
    pub fn same(self, other: Value) -> bool {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (a, b) => a.as_f64() == b.as_f64(),
        }
    }
}

impl Default for Value {
    fn default() -> Self {
        Value::Num(0.0)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(v) => crate::limit::fmt_num(*v, f),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

// Infinities have no JSON number form, so they travel as "+Inf" / "-Inf".
impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Value::Bool(b) => s.serialize_bool(b),
            Value::Num(v) if v == f64::INFINITY => s.serialize_str("+Inf"),
            Value::Num(v) if v == f64::NEG_INFINITY => s.serialize_str("-Inf"),
            Value::Num(v) if v.is_nan() => s.serialize_str("NaN"),
            Value::Num(v) => s.serialize_f64(v),
        }
    }
}

struct ValueVisitor;

impl<'de> Visitor<'de> for ValueVisitor {
    type Value = Value;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a number, a boolean, or one of \"+Inf\", \"-Inf\", \"NaN\"")
    }

    fn visit_bool<E: de::Error>(self, b: bool) -> Result<Value, E> {
        Ok(Value::Bool(b))
    }
    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Value, E> {
        Ok(Value::Num(v))
    }
    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Value, E> {
        Ok(Value::Num(v as f64))
    }
    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Value, E> {
        Ok(Value::Num(v as f64))
    }
    fn visit_str<E: de::Error>(self, v: &str) -> Result<Value, E> {
        parse_special(v).map(Value::Num).ok_or_else(|| E::invalid_value(de::Unexpected::Str(v), &self))
    }
}

pub(crate) fn parse_special(s: &str) -> Option<f64> {
    match s {
        "+Inf" | "Inf" | "inf" | "+inf" => Some(f64::INFINITY),
        "-Inf" | "-inf" => Some(f64::NEG_INFINITY),
        "NaN" => Some(f64::NAN),
        _ => None,
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Value, D::Error> {
        d.deserialize_any(ValueVisitor)
    }
}
