//! Going-up construction: a Liouville-type `ξ` paired with a badly
//! approximable tuple `ζ`, certified on `Q Φ(Q)/Ψ(Q) · min_{n<=Q} ‖nξ‖ Π‖nζ_i‖`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::MAX_COMPONENTS;
use crate::lattice::{min_product, MinHit};
use crate::ratcore::{floor, nearest_dist_lower, rat, rat_int, simplest_in, RatInterval};
use crate::stepfn::StepFunctionSpec;

/// `[a0; prefix..., period, period, ...]`; an empty period means a rational.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfNumber {
    pub a0: i64,
    pub prefix: Vec<u64>,
    pub period: Vec<u64>,
}

impl CfNumber {
    pub fn golden() -> Self {
        Self { a0: 1, prefix: vec![], period: vec![1] }
    }

    pub fn is_rational(&self) -> bool {
        self.period.is_empty()
    }

    /// `a_i` for `i >= 1`, `None` past the end of a rational.
    pub fn quotient(&self, i: usize) -> Option<u64> {
        assert!(i >= 1);
        let j = i - 1;
        if j < self.prefix.len() {
            return Some(self.prefix[j]);
        }
        if self.period.is_empty() {
            return None;
        }
        Some(self.period[(j - self.prefix.len()) % self.period.len()])
    }

    /// The exact value of a rational continued fraction.
    pub fn value(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.convergents_upto(None).last().map(|(p, q)| BigRational::new(p.clone(), q.clone())).unwrap())
    }

    /// Convergents `(p_k, q_k)` from `k = 0`, stopping before the first `q_k > q_max`.
    /// The bound may only be omitted for rationals.
    pub fn convergents_upto(&self, q_max: Option<&BigInt>) -> Vec<(BigInt, BigInt)> {
        assert!(q_max.is_some() || self.is_rational(), "unbounded convergent list");
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (BigInt::from(self.a0), BigInt::one());
        let mut out = vec![(p1.clone(), q1.clone())];
        let mut i = 1;
        while let Some(a) = self.quotient(i) {
            let a = BigInt::from(a);
            let p2 = &a * &p1 + &p0;
            let q2 = &a * &q1 + &q0;
            if q_max.is_some_and(|m| &q2 > m) {
                break;
            }
            out.push((p2.clone(), q2.clone()));
            p0 = std::mem::replace(&mut p1, p2);
            q0 = std::mem::replace(&mut q1, q2);
            i += 1;
        }
        out
    }

    pub fn quotient_bound(&self) -> u64 {
        self.prefix.iter().chain(&self.period).copied().max().unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        if self.prefix.iter().chain(&self.period).any(|&a| a == 0) {
            return Err(Error::InvalidConfig("partial quotients must be positive".into()));
        }
        Ok(())
    }

    /// Closed interval between consecutive convergents, of width below `width`.
    pub fn enclosure(&self, width: &BigRational) -> Result<RatInterval> {
        if self.is_rational() {
            return Err(Error::Domain("rational continued fraction has no enclosure".into()));
        }
        assert!(width.is_positive());
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (BigInt::from(self.a0), BigInt::one());
        let mut i = 1;
        loop {
            let a = BigInt::from(self.quotient(i).unwrap());
            let p2 = &a * &p1 + &p0;
            let q2 = &a * &q1 + &q0;
            // |p1/q1 - p2/q2| = 1/(q1 q2)
            if BigRational::new(BigInt::one(), &q1 * &q2) < *width {
                let (x, y) = (BigRational::new(p1, q1), BigRational::new(p2, q2));
                return RatInterval::new(x.clone().min(y.clone()), x.max(y));
            }
            p0 = std::mem::replace(&mut p1, p2);
            q0 = std::mem::replace(&mut q1, q2);
            i += 1;
        }
    }
}

impl fmt::Display for CfNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        write!(f, "{};{}|{}", self.a0, join(&self.prefix), join(&self.period))
    }
}

impl FromStr for CfNumber {
    type Err = Error;

    /// `golden`, `sqrt2`, `sqrt3`, or `a0;p1,p2,...|r1,r2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let n = match s.trim() {
            "golden" => Self::golden(),
            "sqrt2" => Self { a0: 1, prefix: vec![], period: vec![2] },
            "sqrt3" => Self { a0: 1, prefix: vec![], period: vec![1, 2] },
            other => {
                let bad = || Error::Parse(format!("bad continued fraction {other:?}"));
                let (a0, rest) = other.split_once(';').ok_or_else(bad)?;
                let (pre, per) = rest.split_once('|').unwrap_or((rest, ""));
                let list = |t: &str| -> Result<Vec<u64>> {
                    t.split(',').filter(|x| !x.trim().is_empty()).map(|x| x.trim().parse().map_err(|_| bad())).collect()
                };
                Self { a0: a0.trim().parse().map_err(|_| bad())?, prefix: list(pre)?, period: list(per)? }
            }
        };
        n.validate()?;
        Ok(n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadTupleSpec {
    pub components: Vec<CfNumber>,
}

impl BadTupleSpec {
    pub fn single(x: CfNumber) -> Self {
        Self { components: vec![x] }
    }

    /// `s^{-(k-1)}` for `k` components: the weight for which the product of
    /// per-component constants is valid.
    pub fn natural_psi(&self) -> StepFunctionSpec {
        match self.components.len() {
            1 => StepFunctionSpec::one(),
            k => StepFunctionSpec::Power { num: -(k as i64 - 1), den: 1 },
        }
    }
}

/// Lower constant `C` with `s ‖sζ‖ >= C` for all `s >= 1`.
pub fn bad_constant(x: &CfNumber, scan_to: u64) -> Result<BigRational> {
    if x.is_rational() {
        return Err(Error::Unsupported("a rational is not badly approximable".into()));
    }
    let floor_c = rat_int(x.quotient_bound() + 2).recip();
    let n = scan_to.max(1);
    let w = rat_int(BigInt::from(n).pow(3)).recip();
    let enc = x.enclosure(&w)?;
    let mut best = floor_c.clone();
    for s in 1..=n {
        let sb = BigInt::from(s);
        let v = rat_int(sb.clone()) * nearest_dist_lower(&enc, &sb);
        if v < best {
            best = v;
        }
    }
    Ok(best)
}

/// `C` valid for `Π ‖sζ_i‖ >= C Ψ(s)/s` with the given `Ψ`.
pub fn tuple_constant(spec: &BadTupleSpec, psi: &StepFunctionSpec, scan_to: u64) -> Result<BigRational> {
    let k = spec.components.len();
    if k == 0 || k + 1 > MAX_COMPONENTS {
        return Err(Error::InvalidConfig(format!("need 1..={} components", MAX_COMPONENTS - 1)));
    }
    let mut c = BigRational::one();
    for x in &spec.components {
        c *= bad_constant(x, scan_to)?;
    }
    if k > 1 {
        if psi != &spec.natural_psi() {
            return Err(Error::Unsupported(format!("for {k} components psi must be {}", spec.natural_psi())));
        }
        return Ok(c);
    }
    // ‖sζ‖ >= C/s >= (C / sup Ψ) Ψ(s)/s
    let sup = match psi {
        StepFunctionSpec::Constant { value } => value.clone(),
        StepFunctionSpec::Table { values, .. } => values.iter().max().unwrap().clone(),
        f if f.is_nonincreasing() => f.eval_u64(1),
        _ => return Err(Error::Unsupported("psi must be bounded for a badly approximable number".into())),
    };
    Ok(c / sup)
}

/// Smallest `Q >= start` with `Φ(Q) > q` and `Ψ(Q) <= K min_{t<=Q} Ψ(t)`.
pub fn choose_q_from(
    q: &BigInt,
    phi: &StepFunctionSpec,
    psi: &StepFunctionSpec,
    k: &BigRational,
    start: &BigInt,
    cutoff: &BigInt,
) -> Result<BigInt> {
    if !phi.is_nondecreasing() || !phi.is_unbounded() {
        return Err(Error::Unsupported("phi must be nondecreasing and unbounded".into()));
    }
    let target = rat_int(q.clone());
    let above = |t: &BigInt| phi.eval(t) > target;
    let mut hi = BigInt::one();
    while !above(&hi) {
        hi *= 2;
        if hi > cutoff * BigInt::from(2) {
            return Err(Error::Cutoff { what: "phi(Q) > q".into(), cutoff: cutoff.to_string() });
        }
    }
    let mut lo = BigInt::zero();
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) / 2;
        if mid.is_positive() && above(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut t = hi.max(start.clone()).max(BigInt::one());
    if psi.is_nonincreasing() {
        return Ok(t);
    }
    // a table repeats (or holds) past its end, so one extra period decides it
    let horizon = match psi {
        StepFunctionSpec::Table { values, .. } => Some(t.clone().max(BigInt::from(values.len())) + values.len()),
        _ => None,
    };
    let mut running = psi.prefix_min(&t);
    loop {
        if &t > cutoff || horizon.as_ref().is_some_and(|h| &t > h) {
            return Err(Error::Cutoff { what: "psi(Q) <= K min psi".into(), cutoff: cutoff.to_string() });
        }
        let v = psi.eval(&t);
        running = running.min(v.clone());
        if v <= k * &running {
            return Ok(t);
        }
        t += 1;
    }
}

#[allow(non_snake_case)]
pub fn choose_Q(q: &BigInt, phi: &StepFunctionSpec, psi: &StepFunctionSpec, k: &BigRational, cutoff: &BigInt) -> Result<BigInt> {
    choose_q_from(q, phi, psi, k, &BigInt::one(), cutoff)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistedParams {
    pub spec: BadTupleSpec,
    pub phi: StepFunctionSpec,
    pub psi: StepFunctionSpec,
    pub levels: usize,
    #[serde(rename = "I0", with = "crate::json::interval")]
    pub i0: RatInterval,
    /// Prefix length scanned when certifying the constant of `ζ`.
    pub scan_to: u64,
    /// Largest `Q` tried when searching for a level.
    #[serde(with = "crate::json::bigint_str")]
    pub cutoff: BigInt,
}

impl TwistedParams {
    pub fn new(spec: BadTupleSpec, phi: StepFunctionSpec, psi: StepFunctionSpec, levels: usize) -> Self {
        Self {
            spec,
            phi,
            psi,
            levels,
            i0: RatInterval::new(rat(1, 5), rat(4, 5)).unwrap(),
            scan_to: 10_000,
            cutoff: BigInt::from(1u64 << 40),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistedLevel {
    #[serde(with = "crate::json::bigint_str")]
    pub p: BigInt,
    #[serde(with = "crate::json::bigint_str")]
    pub q: BigInt,
    #[serde(rename = "Q", with = "crate::json::bigint_str")]
    pub big_q: BigInt,
    /// Interval chosen at this level, `[p/q + 1/(6qQ), p/q + 1/(3qQ)]`.
    #[serde(rename = "I", with = "crate::json::interval")]
    pub interval: RatInterval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwistedCase {
    MultipleOfPq,
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistedCertificate {
    pub k: usize,
    #[serde(rename = "Q", with = "crate::json::bigint_str")]
    pub big_q: BigInt,
    /// `Q Φ(Q) / Ψ(Q)`
    #[serde(with = "crate::json::rational")]
    pub weight: BigRational,
    #[serde(with = "crate::json::rational")]
    pub certified: BigRational,
    /// `C / (6K)`
    #[serde(with = "crate::json::rational")]
    pub bound: BigRational,
    pub meets_bound: bool,
    #[serde(with = "crate::json::bigint_str")]
    pub argmin_n: BigInt,
    pub case: TwistedCase,
    #[serde(with = "crate::json::rational_opt")]
    pub multiple_min: Option<BigRational>,
    #[serde(with = "crate::json::rational_opt")]
    pub independent_min: Option<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistedTrace {
    pub params: TwistedParams,
    #[serde(rename = "C", with = "crate::json::rational")]
    pub c: BigRational,
    #[serde(rename = "K", with = "crate::json::rational")]
    pub k: BigRational,
    pub levels: Vec<TwistedLevel>,
    pub certificates: Vec<TwistedCertificate>,
    #[serde(with = "crate::json::interval")]
    pub xi: RatInterval,
}

/// `[p/q + 1/(6qQ), p/q + 1/(3qQ)]`
pub fn level_interval(p: &BigInt, q: &BigInt, big_q: &BigInt) -> RatInterval {
    let c = BigRational::new(p.clone(), q.clone());
    let u = rat_int(q * big_q).recip();
    RatInterval::new(&c + &u / rat_int(6), &c + &u / rat_int(3)).unwrap()
}

/// The smallest-denominator fraction in the left half of `iv`.
fn pick_fraction(iv: &RatInterval) -> (BigInt, BigInt) {
    let f = simplest_in(iv.lo(), &iv.mid());
    (f.numer().clone(), f.denom().clone())
}

fn find_k(p: &TwistedParams, q0: &BigInt, start: &BigInt) -> Result<BigRational> {
    if p.psi.is_nonincreasing() {
        return Ok(BigRational::one());
    }
    let mut k = BigRational::one();
    for _ in 0..=20 {
        if choose_q_from(q0, &p.phi, &p.psi, &k, start, &p.cutoff).is_ok() {
            return Ok(k);
        }
        k *= rat_int(2);
    }
    Err(Error::Cutoff { what: "K for psi(Q) <= K min psi".into(), cutoff: p.cutoff.to_string() })
}

/// Smallest `Q` that keeps the next interval inside the right half-room of `iv`.
fn room_floor(iv: &RatInterval, p: &BigInt, q: &BigInt) -> BigInt {
    // p/q + 1/(3qQ) <= hi  <=>  Q >= 1/(3q (hi - p/q))
    let gap = iv.hi() - BigRational::new(p.clone(), q.clone());
    let need = (rat_int(3) * rat_int(q.clone()) * gap).recip();
    let f = floor(&need);
    if rat_int(f.clone()) == need {
        f
    } else {
        f + 1
    }
}

pub fn build(p: &TwistedParams) -> Result<(Vec<TwistedLevel>, BigRational)> {
    p.phi.validate()?;
    p.psi.validate()?;
    if p.levels == 0 {
        return Err(Error::InvalidConfig("levels must be positive".into()));
    }
    let mut iv = p.i0.clone();
    let mut out = Vec::new();
    let mut k = None;
    for _ in 0..p.levels {
        let (a, q) = pick_fraction(&iv);
        let start = room_floor(&iv, &a, &q);
        let kk = match &k {
            Some(k) => k,
            None => k.insert(find_k(p, &q, &start)?),
        };
        let big_q = choose_q_from(&q, &p.phi, &p.psi, kk, &start, &p.cutoff)?;
        let next = level_interval(&a, &q, &big_q);
        if !iv.contains_interval(&next) || next.lo() <= iv.lo() {
            return Err(Error::Verification("level intervals do not nest".into()));
        }
        out.push(TwistedLevel { p: a, q, big_q, interval: next.clone() });
        iv = next;
    }
    Ok((out, k.unwrap()))
}

fn certify_level(
    lvl: &TwistedLevel,
    k: usize,
    xi: &RatInterval,
    spec: &BadTupleSpec,
    p: &TwistedParams,
    bound: &BigRational,
    narrow: u32,
) -> Result<TwistedCertificate> {
    let n_max = lvl.big_q.clone();
    let w = rat_int(n_max.pow(narrow)).recip();
    let mut boxes = vec![xi.clone()];
    for z in &spec.components {
        boxes.push(z.enclosure(&w)?);
    }
    let q = &lvl.q;
    let scaled: Vec<RatInterval> = boxes.iter().map(|b| b.scale(q)).collect();
    let multiple = min_product(&scaled, &(&n_max / q), |_| true)?.map(|h| MinHit { value: h.value, n: h.n * q });
    let independent = min_product(&boxes, &n_max, |n| !(n % q).is_zero())?;
    let best = [&multiple, &independent]
        .into_iter()
        .flatten()
        .min_by(|a, b| (&a.value, &a.n).cmp(&(&b.value, &b.n)))
        .cloned()
        .ok_or_else(|| Error::Inconclusive("empty range".into()))?;
    let weight = rat_int(n_max.clone()) * p.phi.eval(&n_max) / p.psi.eval(&n_max);
    let certified = &weight * &best.value;
    Ok(TwistedCertificate {
        k,
        big_q: n_max,
        meets_bound: &certified >= bound,
        bound: bound.clone(),
        case: if (&best.n % q).is_zero() { TwistedCase::MultipleOfPq } else { TwistedCase::Independent },
        argmin_n: best.n,
        multiple_min: multiple.map(|h| &weight * h.value),
        independent_min: independent.map(|h| &weight * h.value),
        weight,
        certified,
    })
}

pub fn build_and_certify(p: &TwistedParams) -> Result<TwistedTrace> {
    let c = tuple_constant(&p.spec, &p.psi, p.scan_to)?;
    let (levels, k) = build(p)?;
    let bound = &c / (rat_int(6) * &k);
    let xi = levels.last().unwrap().interval.clone();
    let mut certificates = Vec::new();
    for (i, lvl) in levels.iter().enumerate() {
        let mut cert = certify_level(lvl, i, &xi, &p.spec, p, &bound, 4)?;
        if !cert.meets_bound || !cert.certified.is_positive() {
            // one retry with a much narrower enclosure of ζ
            cert = certify_level(lvl, i, &xi, &p.spec, p, &bound, 8)?;
        }
        if !cert.certified.is_positive() {
            return Err(Error::Inconclusive(format!("level {i}: enclosure too wide")));
        }
        certificates.push(cert);
    }
    Ok(TwistedTrace { params: p.clone(), c, k, levels, certificates, xi })
}

/// Pairs `(r, s)`, not multiples of `(p, q)`, with `0 < s < |qξ - p|⁻¹/3` and
/// `|sξ - r| < 1/(3q)`; always empty when `p/q` is in lowest terms.
pub fn independent_branch_violations(p: i64, q: i64, xi: &BigRational) -> Vec<(i64, i64)> {
    let e = (rat_int(q) * xi - rat_int(p)).abs();
    let limit = if e.is_zero() { None } else { Some((rat_int(3) * e).recip()) };
    let cap = limit.as_ref().map(|l| floor(l).to_i64().unwrap_or(i64::MAX)).unwrap_or(i64::MAX).min(1 << 20);
    let third = (rat_int(3) * rat_int(q)).recip();
    let mut bad = Vec::new();
    for s in 1..=cap {
        if limit.as_ref().is_some_and(|l| rat_int(s) >= *l) {
            break;
        }
        let sx = rat_int(s) * xi;
        let f = floor(&sx).to_i64().unwrap();
        for r in [f, f + 1] {
            if r * q == s * p {
                continue;
            }
            if (&sx - rat_int(r)).abs() < third {
                bad.push((r, s));
            }
        }
    }
    bad
}
