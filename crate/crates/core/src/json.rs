//! Serde adapters: rationals as `"num/den"` strings, big integers as JSON
//! numbers when they fit in 64 bits and as decimal strings otherwise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::ratcore::{fmt_rational, parse_rational};

pub fn bigint_value(n: &BigInt) -> Value {
    if let Some(v) = n.to_i64() {
        Value::from(v)
    } else if let Some(v) = n.to_u64() {
        Value::from(v)
    } else {
        Value::from(n.to_string())
    }
}

fn bigint_from_value(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).or_else(|| n.as_u64().map(BigInt::from)),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

pub mod rational_opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_some(&fmt_rational(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_rational(&s).map_err(D::Error::custom)).transpose()
    }
}

pub mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = xs.iter().map(fmt_rational).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_rational(s).map_err(D::Error::custom)).collect()
    }
}

pub mod bigint_str {
    use super::*;

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        bigint_value(n).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let v = Value::deserialize(d)?;
        bigint_from_value(&v).ok_or_else(|| D::Error::custom("expected integer"))
    }
}

pub mod bigint_vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Value> = xs.iter().map(bigint_value).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<Value>::deserialize(d)?;
        v.iter().map(|x| bigint_from_value(x).ok_or_else(|| D::Error::custom("expected integer"))).collect()
    }
}

pub mod interval {
    use super::*;
    use crate::ratcore::RatInterval;

    /// `"[lo,hi]"`
    pub fn serialize<S: Serializer>(x: &RatInterval, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RatInterval, D::Error> {
        let s = String::deserialize(d)?;
        let inner = s.strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(|| D::Error::custom("expected [lo,hi]"))?;
        let (a, b) = inner.split_once(',').ok_or_else(|| D::Error::custom("expected [lo,hi]"))?;
        let lo = parse_rational(a).map_err(D::Error::custom)?;
        let hi = parse_rational(b).map_err(D::Error::custom)?;
        RatInterval::new(lo, hi).map_err(D::Error::custom)
    }
}

pub mod cf_list {
    use super::*;
    use crate::ratcore::CFWord;

    /// `[a0, a1, ..., ak]`
    pub fn serialize<S: Serializer>(w: &CFWord, s: S) -> Result<S::Ok, S::Error> {
        let mut v = vec![bigint_value(&w.integer_part)];
        v.extend(w.quotients.iter().map(bigint_value));
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CFWord, D::Error> {
        let v = super::bigint_vec::deserialize(d)?;
        let (a0, rest) = v.split_first().ok_or_else(|| D::Error::custom("empty continued fraction"))?;
        CFWord::new(a0.clone(), rest.to_vec()).map_err(D::Error::custom)
    }
}

pub mod bigint_opt {
    use super::*;

    pub fn serialize<S: Serializer>(n: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        n.as_ref().map(bigint_value).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        let v = Option::<Value>::deserialize(d)?;
        v.map(|v| bigint_from_value(&v).ok_or_else(|| D::Error::custom("expected integer"))).transpose()
    }
}
