//! Exact search for small values of `‖n c‖` over `1 <= n <= N`.
//!
//! The pairs `(n, n a - k b)` for `c = a/b` form a rank-2 lattice. Points with
//! `n <= N` and `|n a - k b| <= t b` sit inside the ellipse
//! `n²/N² + y²/(tb)² <= 2`, which is walked exactly from a Lagrange-reduced
//! basis.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ratcore::{floor, nearest_dist_lower, rat, rat_int, RatInterval};

/// Above this many values of `n` a full scan is refused.
pub const SCAN_LIMIT: u64 = 2_000_000;

/// Below this `N` the minimum is taken by direct scan.
pub const BRUTE_LIMIT: u64 = 4096;

/// Values of `n` evaluated up front to bound the minimum.
const SEED_COUNT: u64 = 32;

/// Most lattice points visited per threshold round.
pub const CANDIDATE_LIMIT: u64 = 4_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
struct V2 {
    n: BigInt,
    k: BigInt,
}

struct Form {
    a: BigInt,
    b: BigInt,
    w1: BigInt,
    w2: BigInt,
}

impl Form {
    fn y(&self, v: &V2) -> BigInt {
        &v.n * &self.a - &v.k * &self.b
    }

    fn g(&self, v: &V2) -> BigInt {
        let y = self.y(v);
        &self.w1 * &v.n * &v.n + &self.w2 * &y * &y
    }

    fn bil(&self, u: &V2, v: &V2) -> BigInt {
        &self.w1 * &u.n * &v.n + &self.w2 * self.y(u) * self.y(v)
    }
}

fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    // b > 0
    let two = BigInt::from(2);
    (a * &two + b).div_floor(&(b * &two))
}

/// All `n` in `[1, n_max]` with `‖n c‖ <= t`, ascending.
pub fn small_multiples(c: &BigRational, t: &BigRational, n_max: &BigInt) -> Vec<BigInt> {
    small_multiples_within(c, t, n_max, u64::MAX).expect("unbounded walk")
}

/// As [`small_multiples`], or `None` once the walk visits more than `limit` points.
pub fn small_multiples_within(c: &BigRational, t: &BigRational, n_max: &BigInt, limit: u64) -> Option<Vec<BigInt>> {
    if t.is_negative() || !n_max.is_positive() {
        return Some(Vec::new());
    }
    let a = c.numer().clone();
    let b = c.denom().clone();
    if t.is_zero() {
        // exactly the multiples of the denominator
        let count = (n_max / &b).to_u64().filter(|&x| x <= limit)?;
        return Some((1..=count).map(|j| &b * BigInt::from(j)).collect());
    }
    if t >= &rat(1, 2) {
        let count = n_max.to_u64().filter(|&x| x <= limit)?;
        return Some((1..=count).map(BigInt::from).collect());
    }
    let (tn, td) = (t.numer().clone(), t.denom().clone());
    let w1 = {
        let x = &tn * &b;
        &x * &x
    };
    let w2 = {
        let x = n_max * &td;
        &x * &x
    };
    let r = &w1 * n_max * n_max * 2;
    let f = Form { a, b, w1, w2 };
    let mut u = V2 { n: BigInt::one(), k: BigInt::zero() };
    let mut v = V2 { n: BigInt::zero(), k: BigInt::one() };
    let (mut gu, mut gv) = (f.g(&u), f.g(&v));
    loop {
        if gv < gu {
            std::mem::swap(&mut u, &mut v);
            std::mem::swap(&mut gu, &mut gv);
        }
        let mu = round_div(&f.bil(&u, &v), &gu);
        if mu.is_zero() {
            break;
        }
        v = V2 { n: &v.n - &mu * &u.n, k: &v.k - &mu * &u.k };
        gv = f.g(&v);
    }
    let buv = f.bil(&u, &v);
    let det = &gu * &gv - &buv * &buv;
    debug_assert!(det.is_positive());
    let rg = &r * &gu;
    let bmax: BigInt = Roots::sqrt(&(&rg / &det));
    let bound = &tn * &f.b;
    let mut out = Vec::new();
    let mut visited = 0u64;
    let mut beta = -bmax.clone();
    while beta <= bmax {
        let rem: BigInt = &rg - &beta * &beta * &det;
        if !rem.is_negative() {
            let s: BigInt = Roots::sqrt(&rem);
            let shift = &beta * &buv;
            let lo = -((&s + &shift).div_floor(&gu));
            let hi = (&s - &shift).div_floor(&gu);
            visited = visited.saturating_add((&hi - &lo + 1u32).to_u64().unwrap_or(u64::MAX));
            if visited > limit {
                return None;
            }
            let mut alpha = lo;
            while alpha <= hi {
                let n = &alpha * &u.n + &beta * &v.n;
                if n.is_positive() && &n <= n_max {
                    let k = &alpha * &u.k + &beta * &v.k;
                    let y = &n * &f.a - &k * &f.b;
                    if y.abs() * &td <= bound {
                        out.push(n);
                    }
                }
                alpha += 1;
            }
        }
        beta += 1;
    }
    out.sort();
    out.dedup();
    Some(out)
}

/// The smallest product and the smallest `n` attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinHit {
    pub value: BigRational,
    pub n: BigInt,
}

pub fn product_lower(xs: &[RatInterval], n: &BigInt) -> BigRational {
    let mut acc = BigRational::one();
    for x in xs {
        let d = nearest_dist_lower(x, n);
        if d.is_zero() {
            return d;
        }
        acc *= d;
    }
    acc
}

fn better(a: &MinHit, b: &MinHit) -> bool {
    (&a.value, &a.n) < (&b.value, &b.n)
}

fn reduce_min(hits: impl ParallelIterator<Item = MinHit>) -> Option<MinHit> {
    hits.reduce_with(|a, b| if better(&b, &a) { b } else { a })
}

/// Direct scan over `1..=n_max`.
pub fn min_product_brute<F>(xs: &[RatInterval], n_max: u64, filter: F) -> Option<MinHit>
where
    F: Fn(&BigInt) -> bool + Sync,
{
    assert!(n_max <= SCAN_LIMIT, "scan range too large");
    reduce_min((1..=n_max).into_par_iter().filter_map(|n| {
        let n = BigInt::from(n);
        filter(&n).then(|| MinHit { value: product_lower(xs, &n), n })
    }))
}

/// Exact `min` of `Π_i inf_{x in X_i} ‖n x‖` over `1 <= n <= n_max` passing
/// `filter`; `Ok(None)` when nothing passes.
///
/// If every factor exceeds `t` the product exceeds `t^k`, so once the best
/// candidate among `{n : some factor <= t}` is at most `t^k` it is the global
/// minimum. Fails with `Inconclusive` when the boxes are too wide for the
/// candidate budget.
pub fn min_product<F>(xs: &[RatInterval], n_max: &BigInt, filter: F) -> Result<Option<MinHit>>
where
    F: Fn(&BigInt) -> bool + Sync,
{
    assert!(!xs.is_empty());
    if !n_max.is_positive() {
        return Ok(None);
    }
    if let Some(n) = n_max.to_u64().filter(|&n| n <= BRUTE_LIMIT) {
        return Ok(min_product_brute(xs, n, filter));
    }
    let scan = |what: &str| match n_max.to_u64().filter(|&n| n <= SCAN_LIMIT) {
        Some(n) => Ok(min_product_brute(xs, n, &filter)),
        None => Err(Error::Inconclusive(format!("{what} for exact search up to {n_max}"))),
    };
    let k = xs.len() as u64;
    let mids: Vec<BigRational> = xs.iter().map(|x| x.mid()).collect();
    let slack: Vec<BigRational> = xs.iter().map(|x| x.half_width() * rat_int(n_max.clone())).collect();
    let e = n_max.bits().div_ceil(k);
    let mut t = BigRational::new(BigInt::one(), BigInt::one() << e);
    // a few exact products bound the minimum from above; start at or just above their k-th root
    let seeds: Vec<BigInt> = (1..=SEED_COUNT).map(BigInt::from).filter(|n| filter(n)).collect();
    let seeded =
        seeds.iter().map(|n| MinHit { value: product_lower(xs, n), n: n.clone() }).reduce(|a, b| if better(&b, &a) { b } else { a });
    if let Some(hit) = &seeded {
        if hit.value.is_zero() {
            return Ok(Some(hit.clone()));
        }
        let ratio = floor(&hit.value.recip());
        let e_seed = (ratio.bits() - 1) / k;
        let t_seed = BigRational::new(BigInt::one(), BigInt::one() << e_seed);
        if t_seed < t {
            t = t_seed;
        }
    }
    let half = rat(1, 2);
    loop {
        if t >= half || slack.iter().any(|s| s + &t >= half) {
            return scan("enclosure too wide");
        }
        let mut cands: Vec<BigInt> = Vec::new();
        for (c, s) in mids.iter().zip(&slack) {
            let reach = &t + s;
            let room = CANDIDATE_LIMIT.saturating_sub(cands.len() as u64);
            match small_multiples_within(c, &reach, n_max, room) {
                Some(found) => cands.extend(found),
                None => return scan("too many candidates"),
            }
        }
        cands.extend(seeds.iter().cloned());
        cands.sort();
        cands.dedup();
        let best = reduce_min(cands.par_iter().filter(|n| filter(n)).map(|n| MinHit { value: product_lower(xs, n), n: n.clone() }));
        if let Some(hit) = best {
            if hit.value <= num_traits::pow(t.clone(), k as usize) {
                return Ok(Some(hit));
            }
        }
        t *= rat_int(2);
    }
}
