use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ulc_core::ratcore::{nearest_dist_lower, rat, rat_int, RatInterval};
use ulc_core::sarith::*;
use ulc_core::stepfn::StepFunctionSpec;
use ulc_core::twisted::CfNumber;

const SMALL_PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn subset(mask: u8) -> Vec<u64> {
    SMALL_PRIMES.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect()
}

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn product_formula(q in 1u64..=1_000_000_000, mask in 1u8..64) {
        let l = subset(mask);
        let inc = s_norm(&big(q), &SSpec::Include(l.clone())).unwrap();
        let exc = s_norm(&big(q), &SSpec::ExcludeFinite(l)).unwrap();
        prop_assert_eq!(inc * exc, rat(1, q as i64));
    }

    #[test]
    fn multiplicative(a in 1u64..=1_000_000, b in 1u64..=1_000_000, mask in 0u8..64, include in any::<bool>()) {
        let l = subset(mask);
        let set = if include && !l.is_empty() { SSpec::Include(l) } else { SSpec::ExcludeFinite(l) };
        let n = |x: u64| s_norm(&big(x), &set).unwrap();
        prop_assert_eq!(n(a * b), n(a) * n(b));
    }
}

fn brute(x: &RatInterval, n: u64, set: &SSpec, filter: impl Fn(u64) -> bool) -> (BigRational, u64) {
    (1..=n).filter(|&s| filter(s)).map(|s| (nearest_dist_lower(x, &big(s)) * s_norm(&big(s), set).unwrap(), s)).min().unwrap()
}

#[test]
fn weighted_min_matches_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..24 {
        let d: i64 = rng.gen_range(1_000_000..100_000_000);
        let a: i64 = rng.gen_range(1..d);
        let w: i64 = rng.gen_range(0..3);
        let x = RatInterval::new(rat(a, d), rat(a * 1000 + w, d * 1000)).unwrap();
        let n: u64 = rng.gen_range(4097..12_000);
        let set = match case % 3 {
            0 => SSpec::Include(vec![2, 3]),
            1 => SSpec::Include(vec![5]),
            _ => SSpec::ExcludeFinite(vec![3]),
        };
        let got = weighted_min(&x, &big(n), &set, &[], |_| true).unwrap().unwrap();
        let want = brute(&x, n, &set, |_| true);
        assert_eq!(got.value, want.0, "case {case}");
        assert_eq!(nearest_dist_lower(&x, &got.s) * s_norm(&got.s, &set).unwrap(), got.value);
        let got = weighted_min(&x, &big(n), &set, &[], |s| !(s % 7u32 == BigInt::from(0))).unwrap().unwrap();
        assert_eq!(got.value, brute(&x, n, &set, |s| s % 7 != 0).0, "filtered case {case}");
    }
}

fn padic(p: u64, sched: &[(i64, i64)]) -> PadicReport {
    padic_run(&PadicParams::new(p, sched.iter().map(|&(a, b)| rat(a, b)).collect(), 3)).unwrap()
}

#[test]
fn padic_constant_beta() {
    for p in [2u64, 3] {
        let r = padic(p, &[(1, 10)]);
        assert_eq!(r.certificates.len(), 3);
        let pb = big(p);
        for (k, l) in r.construction.iter().enumerate() {
            assert!(!(&l.u % &pb == BigInt::from(0)), "p | u_{k}");
            let pa = pb.pow(l.a);
            assert!(l.interval.half_width() < &l.beta / rat_int(&pa * &pa));
            assert_eq!(l.interval.mid(), BigRational::new(l.u.clone(), pa.clone()));
            assert_eq!(l.Q, &pa - 1u32);
            if k > 0 {
                assert!(r.construction[k - 1].interval.strictly_contains(&l.interval));
                assert!(l.a > r.construction[k - 1].a);
            }
        }
        for c in &r.certificates {
            assert!(c.value >= rat(4, 5) && c.value <= rat(1, 1), "p={p} k={}", c.k);
        }
    }
}

#[test]
fn padic_level_zero_exhaustive() {
    let r = padic(2, &[(1, 10)]);
    assert_eq!(r.construction[0].a, 4);
    let set = SSpec::Include(vec![2]);
    let (m, s) = brute(&r.enclosure, 15, &set, |_| true);
    assert_eq!(r.certificates[0].value, rat(15, 1) * m);
    assert_eq!(r.certificates[0].argmin_s, big(s));
    // level 1 still small enough for a full loop
    let q1 = r.construction[1].Q.clone();
    let n: u64 = q1.try_into().unwrap();
    let (m1, _) = brute(&r.enclosure, n, &set, |_| true);
    assert_eq!(r.certificates[1].value, rat_int(n) * m1);
}

#[test]
fn padic_decreasing_beta_increases() {
    for p in [2u64, 3] {
        let r = padic(p, &[(1, 10), (1, 20), (1, 40)]);
        for w in r.certificates.windows(2) {
            assert!(w[0].value < w[1].value, "p={p}");
        }
        for c in &r.certificates {
            assert!(c.value <= rat(1, 1) && c.value >= c.floor);
        }
    }
}

fn s_twisted(set: &str, depth: usize) -> STwistedReport {
    s_twisted_run(&STwistedParams::new(set.parse().unwrap(), 2, StepFunctionSpec::floor_sqrt(), depth)).unwrap()
}

#[test]
fn s_twisted_run_certifies() {
    let r = s_twisted("include:3,5", 3);
    let set = &r.params.s;
    let phi = &r.params.phi;
    assert_eq!(r.certificates.len(), 3);
    assert!(r.construction[0].Q <= big(64));
    for (k, l) in r.construction.iter().enumerate() {
        assert_eq!(l.q, big(2).pow(l.a));
        assert!(l.p.is_odd());
        assert_eq!(s_norm(&l.q, set).unwrap(), rat(1, 1));
        assert_eq!(l.Q, phi.inverse(&rat_int(l.q.clone())).unwrap());
        assert!(phi.eval(&l.Q) >= rat_int(l.q.clone()));
        // 1/6 < |q x - p| Q < 1/3 on the whole band
        for x in [l.interval.lo(), l.interval.hi()] {
            let e = (rat_int(l.q.clone()) * x - rat_int(l.p.clone())) * rat_int(l.Q.clone());
            assert!(e > rat(1, 6) && e < rat(1, 3));
        }
        if k > 0 {
            assert!(r.construction[k - 1].interval.strictly_contains(&l.interval));
        }
    }
    for c in &r.certificates {
        assert!(c.value >= rat(1, 3));
        let m = c.multiple_min.as_ref().unwrap();
        assert!(m >= &(&c.phi_Q / rat_int(6)));
        assert_eq!(&c.value, [c.multiple_min.as_ref(), c.independent_min.as_ref()].into_iter().flatten().min().unwrap());
    }
}

#[test]
fn s_twisted_cases_against_scan() {
    let r = s_twisted("include:3,5", 2);
    let set = &r.params.s;
    for c in &r.certificates {
        let l = &r.construction[c.k];
        let n: u64 = l.Q.clone().try_into().unwrap();
        let q: u64 = l.q.clone().try_into().unwrap();
        let w = rat_int(l.Q.clone()) * &c.phi_Q;
        let (mult, _) = brute(&r.enclosure, n, set, |s| s % q == 0);
        let (ind, _) = brute(&r.enclosure, n, set, |s| s % q != 0);
        assert_eq!(c.multiple_min.as_ref().unwrap(), &(&w * mult), "level {}", c.k);
        assert_eq!(c.independent_min.as_ref().unwrap(), &(&w * ind), "level {}", c.k);
    }
}

#[test]
fn s_twisted_plumbing() {
    let set = SSpec::Include(vec![3]);
    for s in 1..2000u64 {
        if s % 3 != 0 {
            assert_eq!(s_norm(&big(s), &set).unwrap(), rat(1, 1));
        }
    }
    let r = s_twisted("include:3", 2);
    assert!(r.certificates.iter().all(|c| c.value >= rat(1, 3)));
    // base inside S is refused
    let bad = STwistedParams::new("include:2,3".parse().unwrap(), 2, StepFunctionSpec::floor_sqrt(), 2);
    assert!(s_twisted_run(&bad).is_err());
}

#[test]
fn singleton_decay_fixture() {
    let xi: CfNumber = "sqrt2".parse().unwrap();
    let rows = singleton_scan(&xi, 3, &[big(100), big(1000), big(10_000)]).unwrap();
    assert!(rows.iter().all(|r| r.exhaustive && r.value <= r.value_upper));
    assert!(rows[2].value_upper < rows[0].value);
    assert!(rows[2].value_upper < rat(1, 100));
}

#[test]
fn singleton_shortcut_agrees_to_ten_thousand() {
    for (name, excluded) in [("sqrt2", 3u64), ("golden", 2), ("sqrt3", 5)] {
        let xi: CfNumber = name.parse().unwrap();
        let x = xi.enclosure(&rat(1, 10_000_000_000_000_000)).unwrap();
        let set = SSpec::ExcludeFinite(vec![excluded]);
        let v = |s: u64| nearest_dist_lower(&x, &big(s)) * s_norm(&big(s), &set).unwrap();
        let mut prefix = v(1);
        for q in 1..=10_000u64 {
            let here = v(q);
            if here < prefix {
                prefix = here;
            }
            let short = singleton_candidates(&xi, &big(q)).iter().map(|s| v(s.try_into().unwrap())).min().unwrap();
            assert_eq!(short, prefix, "{name}, Q = {q}");
        }
    }
}

#[test]
fn singleton_rational_and_golden() {
    let r: CfNumber = "0;3,1,4".parse().unwrap();
    let den = r.value().unwrap().denom().clone();
    let rows = singleton_scan(&r, 3, &[&den - 1u32, den.clone(), &den * 10u32]).unwrap();
    assert!(rows[0].value > rat(0, 1));
    assert!(rows[1].value == rat(0, 1) && rows[2].value == rat(0, 1));
    let g = CfNumber::golden();
    let qs: Vec<BigInt> = [10u64, 100, 1000, 10_000, 100_000].into_iter().map(big).collect();
    let rows = singleton_scan(&g, 2, &qs).unwrap();
    assert!(rows.iter().all(|r| r.value > rat(0, 1)));
    for w in rows.windows(2) {
        assert!(w[1].value_upper < w[0].value);
    }
}
