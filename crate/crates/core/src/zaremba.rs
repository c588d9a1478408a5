//! Bounded partial quotients: F_m membership, Zaremba numerators, primes.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratcore::{cf_expand, non_canonical_twin};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZarembaSet {
    pub q: u64,
    pub m: u64,
    pub numerators: Vec<u64>,
}

impl ZarembaSet {
    pub fn card(&self) -> usize {
        self.numerators.len()
    }

    pub fn contains(&self, u: u64) -> bool {
        self.numerators.binary_search(&u).is_ok()
    }
}

/// Literature values of dim_H(F_m); informational, never used in a proof.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZarembaParams {
    pub m: u64,
    pub delta: Option<f64>,
    pub sigma: Option<f64>,
    pub note: String,
}

/// Dimension threshold needed for the m = 50 argument.
pub const DELTA_THRESHOLD_NUM: u64 = 307;
pub const DELTA_THRESHOLD_DEN: u64 = 312;

impl ZarembaParams {
    pub fn new(m: u64, delta: Option<f64>, note: impl Into<String>) -> Self {
        Self { m, delta, sigma: delta.map(|d| 2.0 * d - 1.001), note: note.into() }
    }

    pub fn known(m: u64) -> Self {
        match m {
            2 => Self::new(2, Some(0.531_280_506_277_205), "Jenkinson-Pollicott; exceeds 0.53"),
            _ => Self::new(m, None, "no tabulated value"),
        }
    }
}

pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// All primes in `[lo, hi]`, ascending, by a segmented sieve.
pub fn sieve_primes(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || lo > hi {
        return Vec::new();
    }
    let lo = lo.max(2);
    let root = (hi as f64).sqrt() as u64 + 2;
    let mut small = vec![true; (root + 1) as usize];
    small[0] = false;
    small[1] = false;
    let mut i = 2;
    while i * i <= root {
        if small[i as usize] {
            let mut j = i * i;
            while j <= root {
                small[j as usize] = false;
                j += i;
            }
        }
        i += 1;
    }
    let base: Vec<u64> = (2..=root).filter(|&k| small[k as usize]).collect();
    const SEG: u64 = 1 << 16;
    let mut out = Vec::new();
    let mut start = lo;
    while start <= hi {
        let end = start.saturating_add(SEG - 1).min(hi);
        let mut seg = vec![true; (end - start + 1) as usize];
        for &p in &base {
            if p * p > end {
                break;
            }
            let first = (p * p).max(start.div_ceil(p) * p);
            let mut j = first;
            while j <= end {
                seg[(j - start) as usize] = false;
                j += p;
            }
        }
        out.extend(seg.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| start + k as u64));
        if end == u64::MAX {
            break;
        }
        start = end + 1;
    }
    out
}

/// True iff the canonical expansion of `x` or its twin has every quotient `<= m`.
pub fn is_fm(x: &BigRational, m: u64) -> Result<bool> {
    if !x.is_positive() || x >= &BigRational::one() {
        return Err(Error::Domain(format!("is_Fm needs 0 < x < 1, got {x}")));
    }
    let w = cf_expand(x);
    Ok(w.all_at_most(m) || non_canonical_twin(&w).all_at_most(m))
}

/// `u/q` reduced and in F_m, on machine integers. The twin form lets the last
/// canonical quotient reach `m + 1`.
pub fn fm_u64(u: u64, q: u64, m: u64) -> bool {
    if u == 0 || u >= q {
        return false;
    }
    let (mut a, mut b) = (q, u);
    loop {
        let (t, r) = (a / b, a % b);
        if r == 0 {
            // last quotient; reduced iff b == 1
            return b == 1 && t <= m + 1;
        }
        if t > m {
            return false;
        }
        a = b;
        b = r;
    }
}

/// Exhaustive scan over residues; the reference path for a single `q`.
pub fn zaremba_numerators(q: u64, m: u64) -> ZarembaSet {
    let numerators = (1..q).filter(|&u| fm_u64(u, q, m)).collect();
    ZarembaSet { q, m, numerators }
}

/// Every Zaremba numerator for every `q` in `[q_lo, q_hi]`, by depth-first
/// generation of continued-fraction words with quotients in `1..=m`.
pub fn zaremba_numerators_dfs(q_lo: u64, q_hi: u64, m: u64) -> BTreeMap<u64, Vec<u64>> {
    let mut buckets: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    // (p_{k-1}, q_{k-1}, p_k, q_k) starting from [0;] with p_{-1}/q_{-1} = 1/0
    let mut stack: Vec<(u64, u64, u64, u64)> = vec![(1, 0, 0, 1)];
    while let Some((pp, qp, p, q)) = stack.pop() {
        for a in 1..=m {
            let Some(nq) = a.checked_mul(q).and_then(|x| x.checked_add(qp)) else { break };
            if nq > q_hi {
                break;
            }
            let np = a * p + pp;
            if nq >= 2 && nq >= q_lo && np < nq {
                buckets.entry(nq).or_default().push(np);
            }
            stack.push((p, q, np, nq));
        }
    }
    for v in buckets.values_mut() {
        v.sort_unstable();
        v.dedup();
    }
    buckets
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub q: u64,
    pub card: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct DensityReport {
    pub T: u64,
    pub gamma: f64,
    pub m: u64,
    pub sigma: f64,
    pub primes: Vec<DensityRow>,
    pub count: usize,
    pub passed: usize,
    pub density: f64,
    pub min_card: Option<usize>,
    pub max_card: Option<usize>,
    pub mean_card: Option<f64>,
}

pub fn density_report(t: u64, gamma: f64, m: u64, sigma: f64) -> Result<DensityReport> {
    if t < 10 {
        return Err(Error::InvalidConfig(format!("T must be >= 10, got {t}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidConfig(format!("gamma must lie in (0,1), got {gamma}")));
    }
    let lo = ((gamma * t as f64).ceil() as u64).max(2);
    let primes = sieve_primes(lo, t);
    let rows: Vec<DensityRow> = primes
        .par_iter()
        .map(|&q| {
            let card = zaremba_numerators(q, m).card();
            let pass = card as f64 >= (q as f64).powf(sigma);
            DensityRow { q, card, pass }
        })
        .collect();
    let count = rows.len();
    let passed = rows.iter().filter(|r| r.pass).count();
    let cards = rows.iter().map(|r| r.card);
    Ok(DensityReport {
        T: t,
        gamma,
        m,
        sigma,
        count,
        passed,
        density: if count == 0 { 0.0 } else { passed as f64 / count as f64 },
        min_card: cards.clone().min(),
        max_card: cards.clone().max(),
        mean_card: (count > 0).then(|| cards.sum::<usize>() as f64 / count as f64),
        primes: rows,
    })
}
