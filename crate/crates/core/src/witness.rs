//! Quadruples `(p, q, r, s)` of primes `q ≠ s` and numerators with
//! `q/s` inside `(1/τ, τ)`, `p/q ∈ I`, `r/s ∈ J` and `{ps/q}, {qr/s} ∈ F_m`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratcore::{ceil, cf_expand, floor, frac, fractions_in, rat, rat_int, CFWord, RatInterval};
use crate::zaremba::{fm_u64, is_fm, is_prime, mod_inverse, sieve_primes, zaremba_numerators};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Fraction scan when the targets are narrow, inversion otherwise.
    #[default]
    Auto,
    /// `p = u s⁻¹ mod q` over Zaremba numerators `u`.
    Inversion,
    /// Reduced fractions with prime denominator inside the targets, tested by CF.
    FractionScan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct SearchConfig {
    #[serde(with = "crate::json::interval")]
    pub I: RatInterval,
    #[serde(with = "crate::json::interval")]
    pub J: RatInterval,
    #[serde(with = "crate::json::rational")]
    pub tau: BigRational,
    pub m: u64,
    pub T_lo: u64,
    pub T_hi: u64,
    /// `None` means unbounded.
    pub max_witnesses: Option<usize>,
    #[serde(with = "crate::json::rational")]
    pub left_margin: BigRational,
    #[serde(default)]
    pub strategy: Strategy,
}

impl SearchConfig {
    #[allow(non_snake_case)]
    pub fn new(I: RatInterval, J: RatInterval, tau: BigRational, m: u64, T_lo: u64, T_hi: u64) -> Self {
        Self { I, J, tau, m, T_lo, T_hi, max_witnesses: None, left_margin: BigRational::zero(), strategy: Strategy::Auto }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = (rat(1, 10), rat(9, 10));
        for (name, iv) in [("I", &self.I), ("J", &self.J)] {
            if iv.lo() <= &lo || iv.hi() >= &hi || iv.lo() >= iv.hi() {
                return Err(Error::InvalidConfig(format!("{name} = {iv} must be a proper subinterval of (1/10, 9/10)")));
            }
        }
        if self.tau <= BigRational::one() {
            return Err(Error::InvalidConfig("tau must exceed 1".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidConfig("m must be positive".into()));
        }
        if self.T_lo < 2 || self.T_lo > self.T_hi {
            return Err(Error::InvalidConfig(format!("bad prime range {}:{}", self.T_lo, self.T_hi)));
        }
        if self.left_margin.is_negative() {
            return Err(Error::InvalidConfig("left_margin must be nonnegative".into()));
        }
        if self.max_witnesses == Some(0) {
            return Err(Error::InvalidConfig("max_witnesses must be positive".into()));
        }
        Ok(())
    }

    fn shrunk(&self, iv: &RatInterval) -> Option<RatInterval> {
        RatInterval::new(iv.lo().clone(), iv.hi() - &self.left_margin).ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Quadruple {
    pub p: u64,
    pub q: u64,
    pub r: u64,
    pub s: u64,
}

impl Quadruple {
    /// Canonical order `(q, s, p, r)`.
    pub fn key(&self) -> (u64, u64, u64, u64) {
        (self.q, self.s, self.p, self.r)
    }

    /// `(ps mod q, qr mod s)`, the Zaremba numerators the quadruple realizes.
    pub fn numerators(&self) -> (u64, u64) {
        (mulm(self.p, self.s, self.q), mulm(self.q, self.r, self.s))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    #[serde(flatten)]
    pub quadruple: Quadruple,
    #[serde(with = "crate::json::rational")]
    pub ratio: BigRational,
    #[serde(rename = "cf1", with = "crate::json::cf_list")]
    pub cf_ps_over_q: CFWord,
    #[serde(rename = "cf2", with = "crate::json::cf_list")]
    pub cf_qr_over_s: CFWord,
    pub checks: BTreeMap<String, bool>,
}

impl WitnessCertificate {
    pub fn passed(&self) -> bool {
        self.checks.values().all(|&b| b)
    }

    pub fn failed(&self) -> Vec<String> {
        self.checks.iter().filter(|(_, &ok)| !ok).map(|(k, _)| k.clone()).collect()
    }
}

fn mulm(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

/// Rechecks C1, C2, C3, reducedness and primality with exact rationals.
#[allow(non_snake_case)]
pub fn verify_witness(quad: &Quadruple, I: &RatInterval, J: &RatInterval, tau: &BigRational, m: u64) -> WitnessCertificate {
    let big = |x: u64| BigInt::from(x);
    let (p, q, r, s) = (big(quad.p), big(quad.q), big(quad.r), big(quad.s));
    let mut checks = BTreeMap::new();
    checks.insert("primality".to_string(), quad.q != quad.s && is_prime(quad.q) && is_prime(quad.s));
    let reduced = !q.is_zero() && !s.is_zero() && (&p * &s).gcd(&q).is_one() && (&q * &r).gcd(&s).is_one();
    checks.insert("reducedness".to_string(), reduced);
    let ratio = if s.is_zero() { BigRational::zero() } else { BigRational::new(q.clone(), s.clone()) };
    let c1 = !s.is_zero() && ratio > tau.recip() && &ratio < tau;
    checks.insert("C1".to_string(), c1);
    let (x1, x2) = if q.is_zero() || s.is_zero() {
        (BigRational::zero(), BigRational::zero())
    } else {
        (frac(&BigRational::new(&p * &s, q.clone())), frac(&BigRational::new(&q * &r, s.clone())))
    };
    let c2 = !q.is_zero()
        && !s.is_zero()
        && I.contains(&BigRational::new(p.clone(), q.clone()))
        && J.contains(&BigRational::new(r.clone(), s.clone()));
    checks.insert("C2".to_string(), c2);
    let c3 = is_fm(&x1, m).unwrap_or(false) && is_fm(&x2, m).unwrap_or(false);
    checks.insert("C3".to_string(), c3);
    WitnessCertificate { quadruple: *quad, ratio, cf_ps_over_q: cf_expand(&x1), cf_qr_over_s: cf_expand(&x2), checks }
}

/// Integers `p` in `[1, q-1]` with `p/q ∈ iv`.
fn numerator_range(iv: &RatInterval, q: u64) -> Option<(u64, u64)> {
    let qq = rat_int(q);
    let lo = ceil(&(iv.lo() * &qq)).to_u64()?.max(1);
    let hi = floor(&(iv.hi() * &qq)).to_u64()?.min(q - 1);
    (lo <= hi).then_some((lo, hi))
}

/// `s` with `1/τ < q/s < τ`, as an index range into ascending `primes`.
fn tau_window(primes: &[u64], q: u64, tau: &BigRational) -> std::ops::Range<usize> {
    let (a, b) = (tau.numer().to_u128().unwrap(), tau.denom().to_u128().unwrap());
    let q = q as u128;
    // s > q b / a and s < q a / b
    let start = primes.partition_point(|&s| s as u128 * a <= q * b);
    let end = primes.partition_point(|&s| (s as u128) * b < q * a);
    start..end.max(start)
}

fn tau_fits(tau: &BigRational) -> Result<()> {
    if tau.numer().to_u64().is_none() || tau.denom().to_u64().is_none() {
        return Err(Error::Unsupported("tau numerator and denominator must fit in 64 bits".into()));
    }
    Ok(())
}

/// Primes per parallel batch; the cap is applied after each batch, and since
/// batches are consumed in canonical order the output does not depend on it.
fn chunk_len() -> usize {
    4 * rayon::current_num_threads().max(1)
}

pub fn find_witnesses(cfg: &SearchConfig) -> Result<Vec<WitnessCertificate>> {
    find_witnesses_with(cfg, |_| true)
}

/// As [`find_witnesses`], keeping only quadruples passing `accept`.
pub fn find_witnesses_with<F>(cfg: &SearchConfig, accept: F) -> Result<Vec<WitnessCertificate>>
where
    F: Fn(&Quadruple) -> bool + Sync,
{
    cfg.validate()?;
    tau_fits(&cfg.tau)?;
    let (Some(ii), Some(jj)) = (cfg.shrunk(&cfg.I), cfg.shrunk(&cfg.J)) else {
        return Ok(Vec::new());
    };
    let strategy = match cfg.strategy {
        Strategy::Auto => {
            let t = rat_int(cfg.T_hi);
            let narrow = rat_int(64);
            if ii.width() * &t <= narrow || jj.width() * &t <= narrow {
                Strategy::FractionScan
            } else {
                Strategy::Inversion
            }
        }
        s => s,
    };
    let quads = match strategy {
        Strategy::FractionScan => fraction_scan(cfg, &ii, &jj, &accept),
        _ => inversion(cfg, &ii, &jj, &accept),
    };
    quads
        .par_iter()
        .map(|quad| {
            let cert = verify_witness(quad, &cfg.I, &cfg.J, &cfg.tau, cfg.m);
            if !cert.passed() {
                return Err(Error::Verification(format!("search emitted {quad:?} failing {:?}", cert.failed())));
            }
            Ok(cert)
        })
        .collect()
}

fn take_until<I>(chunks: I, max: Option<usize>) -> Vec<Quadruple>
where
    I: Iterator<Item = Vec<Quadruple>>,
{
    let mut out = Vec::new();
    for mut batch in chunks {
        out.append(&mut batch);
        if max.is_some_and(|k| out.len() >= k) {
            break;
        }
    }
    if let Some(k) = max {
        out.truncate(k);
    }
    out
}

// Zaremba numerators of q, and the numerator range inside I.
type NumeratorCache = BTreeMap<u64, (Vec<u64>, Option<(u64, u64)>)>;

fn inversion<F>(cfg: &SearchConfig, ii: &RatInterval, jj: &RatInterval, accept: &F) -> Vec<Quadruple>
where
    F: Fn(&Quadruple) -> bool + Sync,
{
    let primes = sieve_primes(cfg.T_lo, cfg.T_hi);
    let mut cache = NumeratorCache::new();
    let chunks = primes.chunks(chunk_len()).map(|qs| {
        let first = tau_window(&primes, qs[0], &cfg.tau).start;
        let last = tau_window(&primes, *qs.last().unwrap(), &cfg.tau).end;
        let lo_s = primes.get(first).copied().unwrap_or(u64::MAX);
        cache.retain(|&s, _| s >= lo_s);
        let missing: Vec<u64> = primes[first..last].iter().copied().filter(|s| !cache.contains_key(s)).collect();
        let fresh: Vec<_> = missing.par_iter().map(|&s| (s, (zaremba_numerators(s, cfg.m).numerators, numerator_range(jj, s)))).collect();
        cache.extend(fresh);
        let cache = &cache;
        let per_q: Vec<Vec<Quadruple>> = qs
            .par_iter()
            .map(|&q| {
                let mut out = Vec::new();
                let Some((plo, phi)) = numerator_range(ii, q) else { return out };
                let mq = &cache.get(&q).expect("q lies in its own window").0;
                for &s in &primes[tau_window(&primes, q, &cfg.tau)] {
                    if s == q {
                        continue;
                    }
                    let (ms, rrange) = &cache[&s];
                    let Some((rlo, rhi)) = *rrange else { continue };
                    let sinv = mod_inverse(s % q, q).unwrap();
                    let mut ps: Vec<u64> = mq.iter().map(|&u| mulm(u, sinv, q)).filter(|p| (plo..=phi).contains(p)).collect();
                    if ps.is_empty() {
                        continue;
                    }
                    let qinv = mod_inverse(q % s, s).unwrap();
                    let mut rs: Vec<u64> = ms.iter().map(|&v| mulm(v, qinv, s)).filter(|r| (rlo..=rhi).contains(r)).collect();
                    ps.sort_unstable();
                    rs.sort_unstable();
                    for &p in &ps {
                        for &r in &rs {
                            let quad = Quadruple { p, q, r, s };
                            if accept(&quad) {
                                out.push(quad);
                            }
                        }
                    }
                }
                out
            })
            .collect();
        per_q.into_iter().flatten().collect()
    });
    take_until(chunks, cfg.max_witnesses)
}

/// Reduced fractions in `iv` with prime denominator in `[lo, hi]`, grouped by denominator.
fn prime_fractions(iv: &RatInterval, lo: u64, hi: u64) -> BTreeMap<u64, Vec<u64>> {
    let mut out: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for (q, p) in fractions_in(iv.lo(), iv.hi(), lo, hi) {
        if is_prime(q) {
            out.entry(q).or_default().push(p);
        }
    }
    out
}

fn fraction_scan<F>(cfg: &SearchConfig, ii: &RatInterval, jj: &RatInterval, accept: &F) -> Vec<Quadruple>
where
    F: Fn(&Quadruple) -> bool + Sync,
{
    let ifr = prime_fractions(ii, cfg.T_lo, cfg.T_hi);
    let jfr = prime_fractions(jj, cfg.T_lo, cfg.T_hi);
    let s_list: Vec<u64> = jfr.keys().copied().collect();
    let qs: Vec<u64> = ifr.keys().copied().collect();
    let chunks = qs.chunks(chunk_len()).map(|block| {
        let per_q: Vec<Vec<Quadruple>> = block
            .par_iter()
            .map(|&q| {
                let mut out = Vec::new();
                for &s in &s_list[tau_window(&s_list, q, &cfg.tau)] {
                    if s == q {
                        continue;
                    }
                    let ps: Vec<u64> = ifr[&q].iter().copied().filter(|&p| fm_u64(mulm(p, s, q), q, cfg.m)).collect();
                    if ps.is_empty() {
                        continue;
                    }
                    let rs: Vec<u64> = jfr[&s].iter().copied().filter(|&r| fm_u64(mulm(q, r, s), s, cfg.m)).collect();
                    for &p in &ps {
                        for &r in &rs {
                            let quad = Quadruple { p, q, r, s };
                            if accept(&quad) {
                                out.push(quad);
                            }
                        }
                    }
                }
                out
            })
            .collect();
        per_q.into_iter().flatten().collect()
    });
    take_until(chunks, cfg.max_witnesses)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(t_lo: u64, t_hi: u64) -> SearchConfig {
        let iv: RatInterval = "1/5:4/5".parse().unwrap();
        SearchConfig::new(iv.clone(), iv, rat(3, 2), 5, t_lo, t_hi)
    }

    #[test]
    fn desk_fixture() {
        let mut cfg = base(50, 200);
        cfg.max_witnesses = Some(5);
        let ws = find_witnesses(&cfg).unwrap();
        assert_eq!(ws.len(), 5);
        assert!(ws.windows(2).all(|w| w[0].quadruple.key() < w[1].quadruple.key()));
        assert!(ws.iter().all(|w| w.passed()));
    }

    #[test]
    fn too_close_tau() {
        let mut cfg = base(101, 102);
        cfg.tau = BigRational::new(BigInt::from(1_000_000_001u64), BigInt::from(1_000_000_000u64));
        assert!(find_witnesses(&cfg).unwrap().is_empty());
    }

    #[test]
    fn named_failures() {
        let iv: RatInterval = "1/5:4/5".parse().unwrap();
        let c = verify_witness(&Quadruple { p: 3, q: 7, r: 3, s: 7 }, &iv, &iv, &rat(3, 2), 5);
        assert!(c.failed().contains(&"primality".to_string()));
        let c = verify_witness(&Quadruple { p: 1, q: 7, r: 3, s: 11 }, &iv, &iv, &rat(3, 2), 5);
        assert!(c.failed().contains(&"C2".to_string()));
        let c = verify_witness(&Quadruple { p: 3, q: 7, r: 3, s: 101 }, &iv, &iv, &rat(3, 2), 5);
        assert!(c.failed().contains(&"C1".to_string()));
    }

    #[test]
    fn config_errors() {
        let mut cfg = base(50, 200);
        cfg.tau = rat(1, 1);
        assert!(find_witnesses(&cfg).is_err());
        let mut cfg = base(50, 200);
        cfg.I = "1/20:1/2".parse().unwrap();
        assert!(find_witnesses(&cfg).is_err());
    }
}
