//! Inputs shared by the benchmarks.

use ulc_core::ratcore::{rat, RatInterval};
use ulc_core::twisted::CfNumber;
use ulc_core::witness::SearchConfig;
use ulc_core::BigInt;

/// Golden-ratio and sqrt 2 enclosures of width below `q_max^-4`.
pub fn quadratic_boxes(q_max: u64) -> Vec<RatInterval> {
    let w = rat(1, 1) / ulc_core::ratcore::rat_int(BigInt::from(q_max).pow(4));
    ["golden", "sqrt2"].iter().map(|s| s.parse::<CfNumber>().unwrap().enclosure(&w).unwrap()).collect()
}

/// m = 5, τ = 3/2, I = J = [1/5, 4/5] over primes in `[lo, hi]`.
pub fn desk_search(lo: u64, hi: u64, cap: usize) -> SearchConfig {
    let iv: RatInterval = "1/5:4/5".parse().unwrap();
    let mut cfg = SearchConfig::new(iv.clone(), iv, rat(3, 2), 5, lo, hi);
    cfg.max_witnesses = Some(cap);
    cfg
}
