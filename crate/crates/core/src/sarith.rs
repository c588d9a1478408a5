//! S-arithmetic variants: `Q min_{s<=Q} ‖sξ‖ |s|_S` for a p-adic
//! counterexample, a `Φ`-twisted construction and the singleton-complement
//! decay.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{min_product, small_multiples_within, CANDIDATE_LIMIT, SCAN_LIMIT};
use crate::ratcore::{floor, nearest_dist_lower, nearest_dist_upper, rat, rat_int, RatInterval};
use crate::stepfn::StepFunctionSpec;
use crate::twisted::CfNumber;
use crate::zaremba::is_prime;

/// A set of primes, listed or cofinite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "primes", rename_all = "snake_case")]
pub enum SSpec {
    Include(Vec<u64>),
    /// All primes except the listed ones.
    ExcludeFinite(Vec<u64>),
}

impl SSpec {
    pub fn primes(&self) -> &[u64] {
        match self {
            Self::Include(v) | Self::ExcludeFinite(v) => v,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ps = self.primes();
        if matches!(self, Self::Include(_)) && ps.is_empty() {
            return Err(Error::InvalidConfig("include list must be nonempty".into()));
        }
        if let Some(&p) = ps.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::InvalidConfig(format!("{p} is not prime")));
        }
        let mut sorted = ps.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != ps.len() {
            return Err(Error::InvalidConfig("primes must be distinct".into()));
        }
        Ok(())
    }

    pub fn contains(&self, p: u64) -> bool {
        match self {
            Self::Include(v) => v.contains(&p),
            Self::ExcludeFinite(v) => !v.contains(&p),
        }
    }
}

impl fmt::Display for SSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, v) = match self {
            Self::Include(v) => ("include", v),
            Self::ExcludeFinite(v) => ("exclude", v),
        };
        let list: Vec<String> = v.iter().map(u64::to_string).collect();
        write!(f, "{kind}:{}", list.join(","))
    }
}

impl FromStr for SSpec {
    type Err = Error;

    /// `include:3,5` or `exclude:3`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad prime set {s:?}"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let primes = rest
            .split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| x.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let spec = match kind {
            "include" => Self::Include(primes),
            "exclude" | "exclude_finite" => Self::ExcludeFinite(primes),
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `(v_p(q), q / p^v)`.
fn split_valuation(q: &BigInt, p: u64) -> (u32, BigInt) {
    let p = BigInt::from(p);
    let mut rest = q.clone();
    let mut v = 0;
    while !rest.is_zero() && (&rest % &p).is_zero() {
        rest /= &p;
        v += 1;
    }
    (v, rest)
}

/// `|q|_S`; only the listed primes are ever divided out of `q`.
pub fn s_norm(q: &BigInt, s: &SSpec) -> Result<BigRational> {
    if q.is_zero() {
        return Err(Error::Domain("|0|_S is undefined".into()));
    }
    let mut part = BigInt::one();
    for &p in s.primes() {
        let (v, _) = split_valuation(q, p);
        part *= BigInt::from(p).pow(v);
    }
    Ok(match s {
        SSpec::Include(_) => BigRational::new(BigInt::one(), part),
        // product formula: |q|_S = |q|_{S^c}^{-1} / |q|
        SSpec::ExcludeFinite(_) => BigRational::new(part, q.abs()),
    })
}

/// All products of the given primes up to `limit`, ascending.
fn smooth_upto(primes: &[u64], limit: &BigInt) -> Vec<BigInt> {
    let mut out = vec![BigInt::one()];
    for &p in primes {
        let p = BigInt::from(p);
        let mut grown = Vec::new();
        for d in &out {
            let mut x = d * &p;
            while &x <= limit {
                grown.push(x.clone());
                x *= &p;
            }
        }
        out.extend(grown);
    }
    out.sort();
    out
}

/// The smallest weighted value and an `s` attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedHit {
    pub value: BigRational,
    pub s: BigInt,
}

fn better(a: &WeightedHit, b: &WeightedHit) -> bool {
    (&a.value, &a.s) < (&b.value, &b.s)
}

fn weighted_at(x: &RatInterval, s: &BigInt, set: &SSpec) -> WeightedHit {
    let d = nearest_dist_lower(x, s);
    let value = if d.is_zero() { d } else { d * s_norm(s, set).expect("s >= 1") };
    WeightedHit { value, s: s.clone() }
}

fn weighted_brute<F>(x: &RatInterval, n_max: u64, set: &SSpec, filter: F) -> Option<WeightedHit>
where
    F: Fn(&BigInt) -> bool + Sync,
{
    (1..=n_max)
        .into_par_iter()
        .filter_map(|n| {
            let n = BigInt::from(n);
            filter(&n).then(|| weighted_at(x, &n, set))
        })
        .reduce_with(|a, b| if better(&b, &a) { b } else { a })
}

/// Exact `min_{1<=s<=N, filter(s)} |s|_S · inf_{x in X} ‖s x‖`.
///
/// For a listed `S` each `s` splits as `m d` with `d` the `S`-part; the minimum
/// of `d⁻¹ ‖m d X‖` over all `m` and `S`-smooth `d` is the same number, since
/// `|m d|_S <= d⁻¹` with equality at the true split. Otherwise `|s|_S >= 1/N`,
/// so once the best value among `{s : ‖sX‖ <= t}` is at most `t/N` it is final.
pub fn weighted_min<F>(x: &RatInterval, n_max: &BigInt, set: &SSpec, seeds: &[BigInt], filter: F) -> Result<Option<WeightedHit>>
where
    F: Fn(&BigInt) -> bool + Sync,
{
    if !n_max.is_positive() {
        return Ok(None);
    }
    if let SSpec::Include(primes) = set {
        let mut best: Option<WeightedHit> = None;
        for d in smooth_upto(primes, n_max) {
            let scaled = [x.scale(&d)];
            let Some(hit) = min_product(&scaled, &(n_max / &d), |m| filter(&(m * &d)))? else {
                continue;
            };
            let cand = weighted_at(x, &(hit.n * &d), set);
            if best.as_ref().is_none_or(|b| better(&cand, b)) {
                best = Some(cand);
            }
        }
        return Ok(best);
    }
    let brute = || match n_max.to_u64().filter(|&n| n <= SCAN_LIMIT) {
        Some(n) => Ok(weighted_brute(x, n, set, &filter)),
        None => Err(Error::Inconclusive(format!("weighted search up to {n_max} exceeds the candidate budget"))),
    };
    let nr = rat_int(n_max.clone());
    let mid = x.mid();
    let slack = x.half_width() * &nr;
    let seeded: Option<WeightedHit> = seeds
        .iter()
        .filter(|s| s.is_positive() && *s <= n_max && filter(s))
        .map(|s| weighted_at(x, s, set))
        .reduce(|a, b| if better(&b, &a) { b } else { a });
    let mut t = match &seeded {
        Some(h) if h.value.is_positive() => &h.value * &nr,
        _ => BigRational::new(BigInt::one(), BigInt::one() << n_max.bits()),
    };
    let half = rat(1, 2);
    loop {
        let reach = &t + &slack;
        if reach >= half {
            return brute();
        }
        let Some(cands) = small_multiples_within(&mid, &reach, n_max, CANDIDATE_LIMIT) else {
            return brute();
        };
        let best = cands.par_iter().filter(|n| filter(n)).map(|n| weighted_at(x, n, set)).chain(seeded.clone()).reduce_with(|a, b| {
            if better(&b, &a) {
                b
            } else {
                a
            }
        });
        if let Some(hit) = best {
            if hit.value <= &t / &nr {
                return Ok(Some(hit));
            }
        }
        t *= rat_int(2);
    }
}

// ---------------------------------------------------------------- p-adic

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PadicParams {
    pub p: u64,
    #[serde(with = "crate::json::rational_vec")]
    pub beta_schedule: Vec<BigRational>,
    pub depth: usize,
    pub a0: u32,
}

impl PadicParams {
    pub fn new(p: u64, beta_schedule: Vec<BigRational>, depth: usize) -> Self {
        Self { p, beta_schedule, depth, a0: 4 }
    }

    /// `β_k`, the last entry repeating.
    pub fn beta(&self, k: usize) -> &BigRational {
        &self.beta_schedule[k.min(self.beta_schedule.len() - 1)]
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::InvalidConfig(format!("{} is not prime", self.p)));
        }
        if self.beta_schedule.is_empty() || self.beta_schedule.iter().any(|b| !b.is_positive() || b >= &rat(1, 2)) {
            return Err(Error::InvalidConfig("every β must lie in (0, 1/2)".into()));
        }
        if self.depth == 0 || self.a0 == 0 {
            return Err(Error::InvalidConfig("depth and a0 must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct PadicLevel {
    pub a: u32,
    #[serde(with = "crate::json::bigint_str")]
    pub u: BigInt,
    #[serde(with = "crate::json::bigint_str")]
    pub Q: BigInt,
    #[serde(with = "crate::json::rational")]
    pub beta: BigRational,
    /// Centre `u/p^a`, radius `β p^{-2a}/2`.
    #[serde(rename = "I", with = "crate::json::interval")]
    pub interval: RatInterval,
}

fn padic_level(p: u64, a: u32, u: BigInt, beta: &BigRational) -> PadicLevel {
    let pa = BigInt::from(p).pow(a);
    let centre = BigRational::new(u.clone(), pa.clone());
    let radius = beta / rat_int(&pa * &pa * 2u32);
    PadicLevel { a, u, Q: pa - 1u32, beta: beta.clone(), interval: RatInterval::ball(&centre, &radius) }
}

/// Nested intervals around `u_k/p^{a_k}`, `p ∤ u_k`. Each `u_{k+1}` appends
/// zeros and a final digit 1 to `u_k`, with `a_{k+1}` minimal for strict
/// nesting.
pub fn build_padic(params: &PadicParams) -> Result<Vec<PadicLevel>> {
    params.validate()?;
    let p = params.p;
    let pb = BigInt::from(p);
    let mut u = pb.pow(params.a0) / 2u32;
    while u.is_zero() || (&u % &pb).is_zero() {
        u += 1u32;
    }
    let mut levels = vec![padic_level(p, params.a0, u, params.beta(0))];
    for k in 1..params.depth {
        let prev = levels.last().unwrap();
        let beta = params.beta(k);
        let mut a = prev.a + 1;
        loop {
            let next = padic_level(p, a, &prev.u * pb.pow(a - prev.a) + 1u32, beta);
            if prev.interval.strictly_contains(&next.interval) {
                levels.push(next);
                break;
            }
            a += 1;
        }
    }
    Ok(levels)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct PadicCertificate {
    pub k: usize,
    #[serde(with = "crate::json::bigint_str")]
    pub Q: BigInt,
    #[serde(with = "crate::json::rational")]
    pub value: BigRational,
    /// `1 - 2β_k`.
    #[serde(with = "crate::json::rational")]
    pub floor: BigRational,
    #[serde(with = "crate::json::bigint_str")]
    pub argmin_s: BigInt,
}

/// `Q_k min_{0<s<=Q_k} |s|_p inf_X ‖sξ‖`, checked against `[1 - 2β_k, 1]`.
pub fn certify_padic(enclosure: &RatInterval, k: usize, level: &PadicLevel, p: u64) -> Result<PadicCertificate> {
    let pa = &level.Q + 1u32;
    let window = RatInterval::ball(&BigRational::new(level.u.clone(), pa.clone()), &(&level.beta / rat_int(&pa * &pa)));
    if !window.contains_interval(enclosure) {
        return Err(Error::Inconclusive(format!("level {k}: enclosure leaves the β window")));
    }
    let set = SSpec::Include(vec![p]);
    let hit = weighted_min(enclosure, &level.Q, &set, &[], |_| true)?.expect("Q >= 1");
    let value = rat_int(level.Q.clone()) * &hit.value;
    let floor = rat_int(1) - rat_int(2) * &level.beta;
    if value < floor || value > rat_int(1) {
        return Err(Error::Verification(format!("level {k}: p-adic value {value} outside [{floor}, 1]")));
    }
    Ok(PadicCertificate { k, Q: level.Q.clone(), value, floor, argmin_s: hit.s })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PadicReport {
    pub params: PadicParams,
    /// `depth` certified levels followed by one refining level.
    pub construction: Vec<PadicLevel>,
    #[serde(with = "crate::json::interval")]
    pub enclosure: RatInterval,
    pub certificates: Vec<PadicCertificate>,
}

/// As [`s_twisted_run`], one refining level beyond `depth`.
pub fn padic_run(params: &PadicParams) -> Result<PadicReport> {
    let mut deeper = params.clone();
    deeper.depth += 1;
    let levels = build_padic(&deeper)?;
    let enclosure = levels.last().unwrap().interval.clone();
    let certificates =
        levels[..params.depth].iter().enumerate().map(|(k, l)| certify_padic(&enclosure, k, l, params.p)).collect::<Result<Vec<_>>>()?;
    Ok(PadicReport { params: params.clone(), construction: levels, enclosure, certificates })
}

// ---------------------------------------------------------------- Φ-twisted

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct STwistedParams {
    pub s: SSpec,
    pub base: u64,
    pub phi: StepFunctionSpec,
    pub depth: usize,
    #[serde(rename = "I0", with = "crate::json::interval")]
    pub i0: RatInterval,
    /// Largest exponent tried per level.
    pub max_exponent: u32,
}

impl STwistedParams {
    pub fn new(s: SSpec, base: u64, phi: StepFunctionSpec, depth: usize) -> Self {
        Self { s, base, phi, depth, i0: RatInterval::new(rat(1, 5), rat(4, 5)).unwrap(), max_exponent: 4096 }
    }

    pub fn validate(&self) -> Result<()> {
        self.s.validate()?;
        self.phi.validate()?;
        if !is_prime(self.base) || self.s.contains(self.base) {
            return Err(Error::InvalidConfig(format!("base {} must be a prime outside S", self.base)));
        }
        if !self.phi.is_nondecreasing() || !self.phi.is_unbounded() {
            return Err(Error::Unsupported("phi must be nondecreasing and unbounded".into()));
        }
        if self.depth == 0 {
            return Err(Error::InvalidConfig("depth must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct STwistedLevel {
    pub a: u32,
    #[serde(with = "crate::json::bigint_str")]
    pub p: BigInt,
    #[serde(with = "crate::json::bigint_str")]
    pub q: BigInt,
    #[serde(with = "crate::json::bigint_str")]
    pub Q: BigInt,
    /// `[p/q + 1/(5qQ), p/q + 1/(4qQ)]`, inside the open `(1/6, 1/3)` window.
    #[serde(rename = "I", with = "crate::json::interval")]
    pub interval: RatInterval,
}

fn band(p: &BigInt, q: &BigInt, big_q: &BigInt) -> RatInterval {
    let c = BigRational::new(p.clone(), q.clone());
    let unit = rat_int(q * big_q).recip();
    RatInterval::new(&c + &unit / rat_int(5), c + unit / rat_int(4)).unwrap()
}

/// Levels with `q_k = base^{a_k}`, `Q_k = Φ⁻¹(q_k)` and `base ∤ p_k`; each
/// `a_k` is the least exponent whose band fits strictly inside the previous one.
pub fn build_s_twisted(params: &STwistedParams) -> Result<Vec<STwistedLevel>> {
    params.validate()?;
    let b = BigInt::from(params.base);
    let mut iv = params.i0.clone();
    let mut a = 0u32;
    let mut levels = Vec::new();
    for _ in 0..params.depth {
        loop {
            a += 1;
            if a > params.max_exponent {
                return Err(Error::Cutoff { what: "band fit".into(), cutoff: format!("{}^{}", params.base, params.max_exponent) });
            }
            let q = b.pow(a);
            let big_q = params.phi.inverse(&rat_int(q.clone()))?;
            let mut p = floor(&(iv.lo() * rat_int(q.clone()))) + 1u32;
            if (&p % &b).is_zero() {
                p += 1u32;
            }
            let next = band(&p, &q, &big_q);
            if iv.strictly_contains(&next) {
                levels.push(STwistedLevel { a, p, q, Q: big_q, interval: next.clone() });
                iv = next;
                break;
            }
        }
    }
    Ok(levels)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum STwistedCase {
    MultipleOfPq,
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct STwistedCertificate {
    pub k: usize,
    #[serde(with = "crate::json::bigint_str")]
    pub Q: BigInt,
    #[serde(with = "crate::json::rational")]
    pub phi_Q: BigRational,
    #[serde(with = "crate::json::rational")]
    pub value: BigRational,
    #[serde(with = "crate::json::bigint_str")]
    pub argmin_s: BigInt,
    pub case: STwistedCase,
    #[serde(with = "crate::json::rational_opt")]
    pub multiple_min: Option<BigRational>,
    #[serde(with = "crate::json::rational_opt")]
    pub independent_min: Option<BigRational>,
}

/// Weighted minimum over `s <= Q`, `q ∤ s`, for `X` inside
/// `(p/q + 1/(6qQ), p/q + 1/(3qQ))` and a listed `S` avoiding the primes of `q`.
///
/// There `‖s x‖ = |c/q + s(x - p/q)|` with `c ≡ s p (mod q)` centred, and
/// `|s(x - p/q)| < 1/(3q)`; for each `S`-smooth `d` with `Q/d >= q` the minimum
/// over `s = m d` sits in the class `c = -1` (largest `m`) or `c = +1` (smallest
/// `m`), every other class being at least `5/(3q)`. Smaller ranges contain no
/// multiple of `q` and go to the lattice search.
fn independent_min(x: &RatInterval, p: &BigInt, q: &BigInt, big_q: &BigInt, primes: &[u64], set: &SSpec) -> Result<Option<WeightedHit>> {
    let far = rat(5, 3) / rat_int(q.clone());
    let mut best: Option<WeightedHit> = None;
    let offer = |cand: WeightedHit, best: &mut Option<WeightedHit>| {
        if best.as_ref().is_none_or(|b| better(&cand, b)) {
            *best = Some(cand);
        }
    };
    for d in smooth_upto(primes, big_q) {
        let m_max = big_q / &d;
        let scaled = x.scale(&d);
        if &m_max < q {
            if let Some(hit) = min_product(std::slice::from_ref(&scaled), &m_max, |_| true)? {
                offer(weighted_at(x, &(hit.n * &d), set), &mut best);
            }
            continue;
        }
        let g = (&d * p).mod_floor(q).extended_gcd(q);
        if !g.gcd.is_one() {
            return Err(Error::Domain("S and p must avoid the primes of q".into()));
        }
        let inv = g.x.mod_floor(q);
        let m_plus = inv.clone();
        let m_minus = (q - &inv).mod_floor(q);
        let m_minus = &m_minus + q * ((&m_max - &m_minus) / q);
        let mut local: Option<(BigRational, BigInt)> = None;
        for m in [m_plus, m_minus] {
            if !m.is_positive() || m > m_max {
                continue;
            }
            let v = nearest_dist_lower(&scaled, &m);
            if local.as_ref().is_none_or(|(lv, lm)| (&v, &m) < (lv, lm)) {
                local = Some((v, m));
            }
        }
        let (v, m) = local.expect("both classes meet [1, Q/d] when Q/d >= q");
        if v >= far {
            return Err(Error::Verification("independent class bound violated".into()));
        }
        offer(weighted_at(x, &(m * &d), set), &mut best);
    }
    Ok(best)
}

/// `Q_k Φ(Q_k) min_{0<s<=Q_k} |s|_S inf_X ‖sξ‖`, split by whether `(r, s)` is a
/// multiple of `(p_k, q_k)`; checked against `1/3` overall and `Φ(Q_k)/6` on
/// the multiples.
pub fn certify_s_twisted(
    enclosure: &RatInterval,
    k: usize,
    level: &STwistedLevel,
    set: &SSpec,
    phi: &StepFunctionSpec,
) -> Result<STwistedCertificate> {
    let (p, q, big_q) = (&level.p, &level.q, &level.Q);
    let c = BigRational::new(p.clone(), q.clone());
    let unit = rat_int(q * big_q).recip();
    let lo = &c + &unit / rat_int(6);
    let hi = &c + &unit / rat_int(3);
    if enclosure.lo() <= &lo || enclosure.hi() >= &hi {
        return Err(Error::Inconclusive(format!("level {k}: enclosure leaves the (1/6, 1/3) window")));
    }
    let phi_q = phi.eval(big_q);
    let weight = rat_int(big_q.clone()) * &phi_q;
    // s = y q with |q|_S = 1
    let multiple = weighted_min(&enclosure.scale(q), &(big_q / q), set, &[BigInt::one()], |_| true)?
        .map(|h| WeightedHit { value: h.value, s: h.s * q });
    let independent = match set {
        SSpec::Include(primes) => independent_min(enclosure, p, q, big_q, primes, set)?,
        SSpec::ExcludeFinite(_) => weighted_min(enclosure, big_q, set, &[], |n| !(n % q).is_zero())?,
    };
    let best = [&multiple, &independent]
        .into_iter()
        .flatten()
        .min_by(|a, b| (&a.value, &a.s).cmp(&(&b.value, &b.s)))
        .cloned()
        .ok_or_else(|| Error::Inconclusive("empty range".into()))?;
    let value = &weight * &best.value;
    let multiple_min = multiple.map(|h| &weight * h.value);
    if value < rat(1, 3) {
        return Err(Error::Verification(format!("level {k}: value {value} below 1/3")));
    }
    if multiple_min.as_ref().is_some_and(|m| m < &(&phi_q / rat_int(6))) {
        return Err(Error::Verification(format!("level {k}: multiple branch below Φ(Q)/6")));
    }
    Ok(STwistedCertificate {
        k,
        Q: big_q.clone(),
        phi_Q: phi_q,
        value,
        case: if (&best.s % q).is_zero() { STwistedCase::MultipleOfPq } else { STwistedCase::Independent },
        argmin_s: best.s,
        multiple_min,
        independent_min: independent.map(|h| &weight * h.value),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct STwistedReport {
    pub params: STwistedParams,
    /// `depth` certified levels followed by one refining level.
    pub construction: Vec<STwistedLevel>,
    #[serde(with = "crate::json::interval")]
    pub enclosure: RatInterval,
    pub certificates: Vec<STwistedCertificate>,
}

/// Builds one level beyond `depth` so every certified level sees an enclosure
/// narrower than its own band.
pub fn s_twisted_run(params: &STwistedParams) -> Result<STwistedReport> {
    let mut deeper = params.clone();
    deeper.depth += 1;
    let levels = build_s_twisted(&deeper)?;
    let enclosure = levels.last().unwrap().interval.clone();
    let certificates = levels[..params.depth]
        .iter()
        .enumerate()
        .map(|(k, l)| certify_s_twisted(&enclosure, k, l, &params.s, &params.phi))
        .collect::<Result<Vec<_>>>()?;
    Ok(STwistedReport { params: params.clone(), construction: levels, enclosure, certificates })
}

// ---------------------------------------------------------------- singleton complement

/// At or below this `Q` every scan row is confirmed by a full loop.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct SingletonRow {
    #[serde(with = "crate::json::bigint_str")]
    pub Q: BigInt,
    /// Exact lower bound for `f(Q)` over the enclosure of `ξ`.
    #[serde(with = "crate::json::rational")]
    pub value: BigRational,
    /// `f(Q)` is at most this.
    #[serde(with = "crate::json::rational")]
    pub value_upper: BigRational,
    #[serde(with = "crate::json::bigint_str")]
    pub argmin: BigInt,
    /// Whether the convergent-based candidates alone reach the minimum.
    pub shortcut_agrees: bool,
    pub exhaustive: bool,
}

/// `s_k + t s_{k-1}` for convergent denominators, `|t| <= a_{k+1}`, within `[1, Q]`.
pub fn singleton_candidates(xi: &CfNumber, big_q: &BigInt) -> Vec<BigInt> {
    let conv = xi.convergents_upto(Some(big_q));
    let mut out = Vec::new();
    for k in 0..conv.len() {
        let s_k = &conv[k].1;
        out.push(s_k.clone());
        if k == 0 {
            continue;
        }
        let s_prev = &conv[k - 1].1;
        let a = xi.quotient(k + 1).unwrap_or(1) as i64;
        for t in -a..=a {
            let c = s_k + s_prev * t;
            if c.is_positive() && &c <= big_q {
                out.push(c);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// `f(Q) = Q min_{0<q<=Q} ‖qξ‖ |q|_S` with `S` all primes but `excluded`.
pub fn singleton_scan(xi: &CfNumber, excluded: u64, q_list: &[BigInt]) -> Result<Vec<SingletonRow>> {
    if !is_prime(excluded) {
        return Err(Error::InvalidConfig(format!("{excluded} is not prime")));
    }
    if q_list.iter().any(|q| !q.is_positive()) || q_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig("Q list must be positive and ascending".into()));
    }
    let Some(q_max) = q_list.last() else {
        return Ok(Vec::new());
    };
    let set = SSpec::ExcludeFinite(vec![excluded]);
    let x = match xi.value() {
        Some(v) => RatInterval::point(v),
        None => xi.enclosure(&rat_int(q_max.pow(4)).recip())?,
    };
    q_list
        .iter()
        .map(|big_q| {
            let seeds = singleton_candidates(xi, big_q);
            let shortcut = seeds
                .iter()
                .map(|s| weighted_at(&x, s, &set))
                .reduce(|a, b| if better(&b, &a) { b } else { a })
                .expect("q = 1 is always a candidate");
            let hit = weighted_min(&x, big_q, &set, &seeds, |_| true)?.expect("Q >= 1");
            let exhaustive = big_q.to_u64().is_some_and(|n| n <= EXHAUSTIVE_LIMIT);
            if exhaustive {
                let full = weighted_brute(&x, big_q.to_u64().unwrap(), &set, |_| true).unwrap();
                if full.value != hit.value {
                    return Err(Error::Verification(format!("Q = {big_q}: lattice minimum disagrees with the full loop")));
                }
            }
            let qr = rat_int(big_q.clone());
            let upper = nearest_dist_upper(&x, &hit.s) * s_norm(&hit.s, &set)?;
            Ok(SingletonRow {
                Q: big_q.clone(),
                value: &qr * &hit.value,
                value_upper: qr * upper,
                shortcut_agrees: shortcut.value == hit.value,
                argmin: hit.s,
                exhaustive,
            })
        })
        .collect()
}
