//! Dual-mode scalar arithmetic.
//!
//! A [`Value`] is either an exact rational (arbitrary precision) or a binary64
//! float. Arithmetic between exact values stays exact; as soon as a float is
//! involved the result is a float. Comparisons between two exact values are
//! decided exactly; any comparison involving a float uses the IEEE total order.
//!
//! Tolerance-aware predicates ([`Value::le_tol`], [`Value::eq_tol`]) take an
//! epsilon that is applied only when at least one operand is a float; a pair of
//! exact values is compared with zero slack. The slack is relative,
//! `eps * max(1, |a|, |b|)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Global comparison tolerance for float-mode data, set once at startup.
static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3E112E0BE826D695); // 1e-9

/// Set the global float-mode tolerance. Intended to be called once at startup.
pub fn set_tolerance(eps: f64) {
    assert!(eps > 0.0, "tolerance must be positive");
    TOLERANCE_BITS.store(eps.to_bits(), AtomicOrdering::SeqCst);
}

/// Current float-mode tolerance (default `1e-9`).
pub fn tolerance() -> f64 {
    f64::from_bits(TOLERANCE_BITS.load(AtomicOrdering::SeqCst))
}

/// Exact rational or binary64 scalar.
#[derive(Clone, Debug)]
pub enum Value {
    Exact(BigRational),
    Float(f64),
}

impl Value {
    pub fn zero() -> Self {
        Value::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Value::Exact(BigRational::one())
    }

    /// Exact rational from an integer numerator/denominator pair.
    pub fn rat(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Value::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn int(n: i64) -> Self {
        Value::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn float(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite scalar");
        Value::Float(x)
    }

    /// Convert a float into the exact rational it denotes in binary.
    pub fn float_to_exact(x: f64) -> Self {
        Value::Exact(BigRational::from_f64(x).expect("non-finite scalar"))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or_else(|| {
                // Denominator/numerator too large for a finite f64 conversion
                // path in num; fall back through string formatting.
                format!("{}", r).parse().unwrap_or(f64::NAN)
            }),
            Value::Float(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_zero(),
            Value::Float(x) => *x == 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_negative(),
            Value::Float(x) => *x < 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_positive(),
            Value::Float(x) => *x > 0.0,
        }
    }

    pub fn abs(&self) -> Value {
        match self {
            Value::Exact(r) => Value::Exact(r.abs()),
            Value::Float(x) => Value::Float(x.abs()),
        }
    }

    pub fn max(self, other: Value) -> Value {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Value) -> Value {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Positive part `max(self, 0)`.
    pub fn pos(&self) -> Value {
        if self.is_negative() {
            Value::zero()
        } else {
            self.clone()
        }
    }

    fn slack(a: &Value, b: &Value, eps: f64) -> f64 {
        if a.is_exact() && b.is_exact() {
            0.0
        } else {
            eps * 1.0_f64.max(a.to_f64().abs()).max(b.to_f64().abs())
        }
    }

    /// `a <= b` up to relative slack (zero slack when both are exact).
    pub fn le_tol(&self, other: &Value, eps: f64) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a <= b,
            _ => self.to_f64() <= other.to_f64() + Value::slack(self, other, eps),
        }
    }

    /// `a == b` up to relative slack (exact equality when both are exact).
    pub fn eq_tol(&self, other: &Value, eps: f64) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= Value::slack(self, other, eps),
        }
    }

    /// Parse "p/q", an integer, or a decimal string into an exact value.
    pub fn parse_exact(s: &str) -> Result<Value, String> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let n = BigInt::from_str(num.trim()).map_err(|e| format!("bad numerator: {e}"))?;
            let d = BigInt::from_str(den.trim()).map_err(|e| format!("bad denominator: {e}"))?;
            if d.is_zero() {
                return Err("zero denominator".into());
            }
            return Ok(Value::Exact(BigRational::new(n, d)));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let int = if int.is_empty() || int == "-" { format!("{int}0") } else { int.to_string() };
            let neg = int.starts_with('-');
            let i = BigInt::from_str(&int).map_err(|e| format!("bad number: {e}"))?;
            let f = if frac.is_empty() {
                BigInt::zero()
            } else {
                BigInt::from_str(frac).map_err(|e| format!("bad number: {e}"))?
            };
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let mag = i.abs() * &scale + f;
            let num = if neg { -mag } else { mag };
            return Ok(Value::Exact(BigRational::new(num, scale)));
        }
        let n = BigInt::from_str(s).map_err(|e| format!("bad number: {e}"))?;
        Ok(Value::Exact(BigRational::from_integer(n)))
    }
}

impl serde::Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Exact(r) => {
                if r.is_integer() {
                    if let Some(i) = r.numer().to_i64() {
                        return serializer.serialize_i64(i);
                    }
                }
                serializer.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
            }
            Value::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

impl<'de> serde::Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ValueVisitor;
        impl serde::de::Visitor<'_> for ValueVisitor {
            type Value = Value;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a rational string like \"1/3\"")
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Value, E> {
                Ok(Value::int(v))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Value, E> {
                Ok(Value::Exact(BigRational::from_integer(BigInt::from(v))))
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<Value, E> {
                if !v.is_finite() {
                    return Err(E::custom("non-finite number"));
                }
                Ok(Value::Float(v))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Value, E> {
                Value::parse_exact(v).map_err(E::custom)
            }
        }
        deserializer.deserialize_any(ValueVisitor)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

macro_rules! value_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for &Value {
            type Output = Value;
            fn $method(self, rhs: &Value) -> Value {
                match (self, rhs) {
                    (Value::Exact(a), Value::Exact(b)) => Value::Exact(a.$method(b)),
                    _ => Value::Float(self.to_f64().$method(rhs.to_f64())),
                }
            }
        }
        impl $trait for Value {
            type Output = Value;
            fn $method(self, rhs: Value) -> Value {
                (&self).$method(&rhs)
            }
        }
    };
}

value_binop!(Add, add);
value_binop!(Sub, sub);
value_binop!(Mul, mul);
value_binop!(Div, div);

impl Neg for &Value {
    type Output = Value;
    fn neg(self) -> Value {
        match self {
            Value::Exact(r) => Value::Exact(-r),
            Value::Float(x) => Value::Float(-*x),
        }
    }
}

impl Neg for Value {
    type Output = Value;
    fn neg(self) -> Value {
        -&self
    }
}
