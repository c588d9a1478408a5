//! Rational-valued step functions on the positive integers (the Φ and Ψ weights).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratcore::{fmt_rational, parse_rational, rat_int};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepFunctionSpec {
    Constant {
        #[serde(with = "crate::json::rational")]
        value: BigRational,
    },
    /// `⌊log₂(t+1)⌋`
    Log,
    /// `1/⌊log₂(t+1)⌋`
    ReciprocalLog,
    /// `⌊t^(num/den)⌋`, or its reciprocal when `num < 0`.
    Power { num: i64, den: u32 },
    /// `values[t-1]`, repeating when `periodic`, else holding the last value.
    Table {
        #[serde(with = "crate::json::rational_vec")]
        values: Vec<BigRational>,
        periodic: bool,
    },
}

impl StepFunctionSpec {
    pub fn one() -> Self {
        Self::Constant { value: BigRational::one() }
    }

    pub fn identity() -> Self {
        Self::Power { num: 1, den: 1 }
    }

    pub fn floor_sqrt() -> Self {
        Self::Power { num: 1, den: 2 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { value } if !value.is_positive() => Err(Error::InvalidConfig("constant step function must be positive".into())),
            Self::Power { den: 0, .. } => Err(Error::InvalidConfig("power with zero denominator".into())),
            Self::Table { values, .. } if values.is_empty() || values.iter().any(|v| !v.is_positive()) => {
                Err(Error::InvalidConfig("table needs positive values".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: &BigInt) -> BigRational {
        assert!(t.is_positive(), "step functions live on positive integers");
        match self {
            Self::Constant { value } => value.clone(),
            Self::Log => rat_int(floor_log2_succ(t)),
            Self::ReciprocalLog => rat_int(floor_log2_succ(t)).recip(),
            Self::Power { num, den } => {
                let e = num.unsigned_abs() as usize;
                let base = num_traits::pow(t.clone(), e);
                let root = if *den == 1 { base } else { base.nth_root(*den) };
                if *num >= 0 {
                    rat_int(root)
                } else {
                    rat_int(root).recip()
                }
            }
            Self::Table { values, periodic } => {
                let i = t - BigInt::one();
                let len = BigInt::from(values.len());
                let idx = if *periodic { i % &len } else { i.min(len - 1) };
                values[idx.to_usize().unwrap()].clone()
            }
        }
    }

    pub fn eval_u64(&self, t: u64) -> BigRational {
        self.eval(&BigInt::from(t))
    }

    pub fn is_nondecreasing(&self) -> bool {
        match self {
            Self::Constant { .. } | Self::Log => true,
            Self::ReciprocalLog => false,
            Self::Power { num, .. } => *num >= 0,
            Self::Table { values, periodic } => {
                values.windows(2).all(|w| w[0] <= w[1]) && (!periodic || values.iter().all(|v| v == &values[0]))
            }
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        match self {
            Self::Constant { .. } | Self::ReciprocalLog => true,
            Self::Log => false,
            Self::Power { num, .. } => *num <= 0,
            Self::Table { values, periodic } => {
                values.windows(2).all(|w| w[0] >= w[1]) && (!periodic || values.iter().all(|v| v == &values[0]))
            }
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, Self::Log) || matches!(self, Self::Power { num, .. } if *num > 0)
    }

    /// `min_{1 <= t <= q} f(t)`.
    pub fn prefix_min(&self, q: &BigInt) -> BigRational {
        assert!(q.is_positive());
        if self.is_nondecreasing() {
            return self.eval(&BigInt::one());
        }
        if self.is_nonincreasing() {
            return self.eval(q);
        }
        match self {
            // past the table end the sequence only repeats or holds its last value
            Self::Table { values, .. } => {
                let n = q.to_usize().map_or(values.len(), |n| n.min(values.len()));
                values[..n].iter().min().unwrap().clone()
            }
            _ => unreachable!("monotone kinds handled above"),
        }
    }

    /// `min{t >= 1 : f(y) >= x for all y >= t}`, for nondecreasing unbounded `f`.
    pub fn inverse(&self, x: &BigRational) -> Result<BigInt> {
        if !self.is_nondecreasing() || !self.is_unbounded() {
            return Err(Error::Unsupported("inverse needs a nondecreasing unbounded function".into()));
        }
        let mut hi = BigInt::one();
        while &self.eval(&hi) < x {
            hi *= 2;
        }
        let mut lo = BigInt::one();
        if &self.eval(&lo) >= x {
            return Ok(lo);
        }
        // f(lo) < x <= f(hi)
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) / 2;
            if &self.eval(&mid) >= x {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// `⌊log₂(t+1)⌋` for `t >= 1`.
fn floor_log2_succ(t: &BigInt) -> BigInt {
    BigInt::from((t + 1u32).bits() - 1)
}

impl fmt::Display for StepFunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { value } => write!(f, "const:{}", fmt_rational(value)),
            Self::Log => write!(f, "log"),
            Self::ReciprocalLog => write!(f, "reciprocal_log"),
            Self::Power { num, den } => write!(f, "power:{num}/{den}"),
            Self::Table { values, periodic } => {
                let v: Vec<String> = values.iter().map(fmt_rational).collect();
                write!(f, "table{}:{}", if *periodic { "-periodic" } else { "" }, v.join(","))
            }
        }
    }
}

impl FromStr for StepFunctionSpec {
    type Err = Error;

    /// `one`, `identity`, `sqrt`, `log`, `reciprocal_log`, `const:a/b`,
    /// `power:a/b`, `table:v1,v2,...`, `table-periodic:v1,v2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let spec = match s.trim() {
            "one" | "1" => Self::one(),
            "identity" | "t" => Self::identity(),
            "sqrt" => Self::floor_sqrt(),
            "log" => Self::Log,
            "reciprocal_log" => Self::ReciprocalLog,
            other => {
                let (kind, arg) = other.split_once(':').ok_or_else(|| Error::Parse(format!("unknown step function {other:?}")))?;
                match kind {
                    "const" => Self::Constant { value: parse_rational(arg)? },
                    "power" => {
                        let e = parse_rational(arg)?;
                        Self::Power {
                            num: e.numer().to_i64().ok_or_else(|| Error::Parse("exponent too large".into()))?,
                            den: e.denom().to_u32().ok_or_else(|| Error::Parse("exponent too large".into()))?,
                        }
                    }
                    "table" | "table-periodic" => Self::Table {
                        values: arg.split(',').map(parse_rational).collect::<Result<_>>()?,
                        periodic: kind == "table-periodic",
                    },
                    _ => return Err(Error::Parse(format!("unknown step function {other:?}"))),
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}
