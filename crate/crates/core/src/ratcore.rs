//! Exact rationals, closed rational intervals, continued fractions and the
//! nearest-integer distance.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn int(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Parses `a/b`, an integer, or a finite decimal such as `0.01465` (exactly).
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let a = BigInt::from_str(a.trim()).map_err(|_| bad())?;
        let b = BigInt::from_str(b.trim()).map_err(|_| bad())?;
        if b.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(a, b));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        let whole = if ip.is_empty() { BigInt::zero() } else { BigInt::from_str(ip).map_err(|_| bad())? };
        let frac = BigInt::from_str(fp).map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), fp.len());
        let v = BigRational::new(whole * &den + frac, den);
        return Ok(if neg { -v } else { v });
    }
    BigInt::from_str(s).map(BigRational::from_integer).map_err(|_| bad())
}

/// `num/den` with the denominator always present.
pub fn fmt_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Decimal approximation, for human-facing reports only.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Shift both parts down so the ratio survives the conversion.
        let bits = x.numer().bits().max(x.denom().bits()) as i64 - 1000;
        let sh = bits.max(0) as usize;
        let n = (x.numer() >> sh).to_f64().unwrap_or(0.0);
        let d = (x.denom() >> sh).to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn floor(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn ceil(x: &BigRational) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

/// Fractional part `x - floor(x)` in `[0, 1)`.
pub fn frac(x: &BigRational) -> BigRational {
    BigRational::new(x.numer().mod_floor(x.denom()), x.denom().clone())
}

/// `‖a/b‖` as an unreduced pair `(r, b)` with `0 <= r <= b/2`.
pub(crate) fn dist_parts(num: &BigInt, den: &BigInt) -> BigInt {
    let r = num.mod_floor(den);
    let s = den - &r;
    if s < r {
        s
    } else {
        r
    }
}

/// Distance to the nearest integer.
pub fn nearest_dist(x: &BigRational) -> BigRational {
    BigRational::new(dist_parts(x.numer(), x.denom()), x.denom().clone())
}

/// Closed interval with rational endpoints; `lo == hi` is allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RatInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain(format!("interval endpoints out of order: {} > {}", fmt_rational(&lo), fmt_rational(&hi))));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: BigRational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    /// Closed ball `[c - r, c + r]`.
    pub fn ball(c: &BigRational, r: &BigRational) -> Self {
        assert!(!r.is_negative());
        Self { lo: c - r, hi: c + r }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / rat_int(2)
    }

    pub fn half_width(&self) -> BigRational {
        self.width() / rat_int(2)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &RatInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `other` lies inside `self` and differs from it.
    pub fn strictly_contains(&self, other: &RatInterval) -> bool {
        self.contains_interval(other) && self != other
    }

    pub fn scale(&self, n: &BigInt) -> RatInterval {
        let n = rat_int(n.clone());
        if n.is_negative() {
            Self { lo: &self.hi * &n, hi: &self.lo * &n }
        } else {
            Self { lo: &self.lo * &n, hi: &self.hi * &n }
        }
    }

    pub fn shift(&self, c: &BigRational) -> RatInterval {
        Self { lo: &self.lo + c, hi: &self.hi + c }
    }
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", fmt_rational(&self.lo), fmt_rational(&self.hi))
    }
}

impl FromStr for RatInterval {
    type Err = Error;

    /// `lo:hi`
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(':').ok_or_else(|| Error::Parse(format!("expected lo:hi, got {s:?}")))?;
        RatInterval::new(parse_rational(a)?, parse_rational(b)?)
    }
}

/// Infimum of `‖n x‖` over `x` in `X`.
///
/// On each `[k, k+1]` the distance is a tent, so away from integers the
/// infimum sits at an endpoint of `n X`.
pub fn nearest_dist_lower(x: &RatInterval, n: &BigInt) -> BigRational {
    let y = x.scale(n);
    let fl = floor(&y.hi);
    if rat_int(fl.clone()) >= y.lo {
        return BigRational::zero();
    }
    let a = nearest_dist(&y.lo);
    let b = nearest_dist(&y.hi);
    a.min(b)
}

/// Supremum of `‖n x‖` over `x` in `X`.
pub fn nearest_dist_upper(x: &RatInterval, n: &BigInt) -> BigRational {
    let y = x.scale(n);
    // a half-integer k + 1/2 lies in [lo, hi] iff floor(hi - 1/2) >= lo - 1/2
    let half = rat(1, 2);
    let k = floor(&(&y.hi - &half));
    if rat_int(k) + &half >= y.lo {
        return half;
    }
    nearest_dist(&y.lo).max(nearest_dist(&y.hi))
}

/// Finite continued fraction `[a0; a1, ..., ak]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CFWord {
    #[serde(with = "crate::json::bigint_str")]
    pub integer_part: BigInt,
    #[serde(with = "crate::json::bigint_vec")]
    pub quotients: Vec<BigInt>,
    pub canonical: bool,
}

impl CFWord {
    pub fn new(integer_part: BigInt, quotients: Vec<BigInt>) -> Result<Self> {
        if quotients.iter().any(|a| a < &BigInt::one()) {
            return Err(Error::Domain("partial quotients must be positive".into()));
        }
        let canonical = quotients.last().is_none_or(|a| a > &BigInt::one());
        Ok(Self { integer_part, quotients, canonical })
    }

    pub fn max_quotient(&self) -> Option<&BigInt> {
        self.quotients.iter().max()
    }

    pub fn all_at_most(&self, m: u64) -> bool {
        let m = BigInt::from(m);
        self.quotients.iter().all(|a| a <= &m)
    }
}

impl fmt::Display for CFWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{};", self.integer_part)?;
        for (i, a) in self.quotients.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, " {a}")?;
        }
        write!(f, "]")
    }
}

pub fn cf_expand(x: &BigRational) -> CFWord {
    let (mut a, mut b) = (x.numer().clone(), x.denom().clone());
    let (q0, r0) = a.div_mod_floor(&b);
    let integer_part = q0;
    a = b;
    b = r0;
    let mut quotients = Vec::new();
    while !b.is_zero() {
        let (q, r) = a.div_mod_floor(&b);
        quotients.push(q);
        a = b;
        b = r;
    }
    let canonical = quotients.last().is_none_or(|q| q > &BigInt::one());
    CFWord { integer_part, quotients, canonical }
}

pub fn cf_value(w: &CFWord) -> BigRational {
    // fold from the right: h/k <- a + k/h
    let (mut h, mut k) = (BigInt::one(), BigInt::zero());
    for a in w.quotients.iter().rev() {
        let nh = a * &h + &k;
        k = h;
        h = nh;
    }
    // value = integer_part + k/h
    if h.is_zero() {
        return rat_int(w.integer_part.clone());
    }
    BigRational::new(&w.integer_part * &h + k, h)
}

/// Convergents `(p_k, q_k)` for `k = 0..=len`, starting with `(a0, 1)`.
pub fn convergents(w: &CFWord) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::with_capacity(w.quotients.len() + 1);
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (w.integer_part.clone(), BigInt::one());
    out.push((p1.clone(), q1.clone()));
    for a in &w.quotients {
        let p2 = a * &p1 + &p0;
        let q2 = a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        out.push((p1.clone(), q1.clone()));
    }
    out
}

/// The other finite expansion of the same rational.
pub fn non_canonical_twin(w: &CFWord) -> CFWord {
    let one = BigInt::one();
    let mut q = w.quotients.clone();
    let mut a0 = w.integer_part.clone();
    match q.last().cloned() {
        None => {
            a0 -= &one;
            q.push(one.clone());
        }
        Some(last) if last > one => {
            *q.last_mut().unwrap() = last - &one;
            q.push(one.clone());
        }
        Some(_) => {
            q.pop();
            match q.last_mut() {
                Some(prev) => *prev += &one,
                None => a0 += &one,
            }
        }
    }
    let canonical = q.last().is_none_or(|x| x > &one);
    CFWord { integer_part: a0, quotients: q, canonical }
}

/// Smallest-denominator rational in `[lo, hi]` (smallest numerator on ties,
/// which only happens when the interval holds several integers).
pub fn simplest_in(lo: &BigRational, hi: &BigRational) -> BigRational {
    assert!(lo <= hi);
    let c = ceil(lo);
    if rat_int(c.clone()) <= *hi {
        return rat_int(c);
    }
    let n = floor(lo);
    let nr = rat_int(n.clone());
    // lo - n in (0,1); recurse on reciprocals
    let inner = simplest_in(&(hi - &nr).recip(), &(lo - &nr).recip());
    nr + inner.recip()
}

/// All reduced `p/q` in `[lo, hi]` with `qmin <= q <= qmax`, sorted by `(q, p)`.
///
/// Around the simplest fraction `a/b`, a fraction `p/q` has `pb - aq = j != 0`
/// and lies at distance `|j|/(qb)`, so for each `j` the admissible `q` form a
/// residue class modulo `b` above a threshold.
pub fn fractions_in(lo: &BigRational, hi: &BigRational, qmin: u64, qmax: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    if lo > hi || qmax == 0 || qmin > qmax {
        return out;
    }
    let qmin = qmin.max(1);
    let s = simplest_in(lo, hi);
    let Some(b) = s.denom().to_u64() else { return out };
    if b > qmax {
        return out;
    }
    let a = s.numer().clone();
    if b >= qmin {
        if let Some(a) = a.to_u64() {
            out.push((b, a));
        }
    }
    let a_mod_b = a.mod_floor(&BigInt::from(b)).to_u64().unwrap();
    let a_inv = if b == 1 { 0 } else { crate::zaremba::mod_inverse(a_mod_b, b).unwrap() };
    let bq = rat_int(b);
    for (gap, sign) in [(hi - &s, 1i8), (&s - lo, -1i8)] {
        if gap.is_zero() {
            continue;
        }
        // q >= j / (b * gap)
        let step = (&bq * &gap).recip();
        let jmax = floor(&(rat_int(qmax) * &bq * &gap)).to_u64().unwrap_or(u64::MAX);
        let mut j: u64 = 1;
        while j <= jmax {
            let qlo = ceil(&(&step * rat_int(j))).to_u64().unwrap_or(u64::MAX).max(qmin);
            if qlo > qmax {
                break;
            }
            // sign>0: a q = -j (mod b); sign<0: a q = j (mod b)
            let jm = j % b;
            let target = if sign > 0 { (b - jm) % b } else { jm };
            let r = if b == 1 { 0 } else { ((target as u128 * a_inv as u128) % b as u128) as u64 };
            let mut q = qlo + ((r + b - qlo % b) % b);
            while q <= qmax {
                let aq = &a * BigInt::from(q);
                let p = if sign > 0 { (aq + BigInt::from(j)) / BigInt::from(b) } else { (aq - BigInt::from(j)) / BigInt::from(b) };
                if let Some(p) = p.to_u64() {
                    if p.gcd(&q) == 1 {
                        out.push((q, p));
                    }
                }
                q += b;
            }
            j += 1;
        }
    }
    out.sort_unstable();
    out
}

pub fn is_integer(x: &BigRational) -> bool {
    x.denom().is_one()
}
