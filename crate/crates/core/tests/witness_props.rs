use num_bigint::BigInt;
use num_rational::BigRational;
use ulc_core::ratcore::{frac, rat, RatInterval};
use ulc_core::witness::*;
use ulc_core::zaremba::zaremba_numerators;

fn trial_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

// both finite expansions of u/q (u < q) have every quotient <= m
fn euclid_fm(u: u64, q: u64, m: u64) -> bool {
    let (mut a, mut b) = (q, u);
    let mut qs = Vec::new();
    while b != 0 {
        qs.push(a / b);
        (a, b) = (b, a % b);
    }
    if a != 1 || qs.is_empty() {
        return false;
    }
    let n = qs.len();
    qs[..n - 1].iter().all(|&x| x <= m) && qs[n - 1] <= m + 1
}

fn inside(x: u64, d: u64, iv: &RatInterval) -> bool {
    iv.contains(&rat(x as i64, d as i64))
}

#[allow(non_snake_case)]
fn brute(I: &RatInterval, J: &RatInterval, tau: &BigRational, m: u64, lo: u64, hi: u64) -> Vec<(u64, u64, u64, u64)> {
    let primes: Vec<u64> = (lo..=hi).filter(|&n| trial_prime(n)).collect();
    let mut out = Vec::new();
    for &q in &primes {
        for &s in &primes {
            let ratio = rat(q as i64, s as i64);
            if q == s || ratio <= tau.recip() || &ratio >= tau {
                continue;
            }
            let ps: Vec<u64> = (1..q).filter(|&p| inside(p, q, I) && euclid_fm(p * s % q, q, m)).collect();
            let rs: Vec<u64> = (1..s).filter(|&r| inside(r, s, J) && euclid_fm(q * r % s, s, m)).collect();
            for &p in &ps {
                for &r in &rs {
                    out.push((q, s, p, r));
                }
            }
        }
    }
    out
}

fn keys(ws: &[WitnessCertificate]) -> Vec<(u64, u64, u64, u64)> {
    ws.iter().map(|w| w.quadruple.key()).collect()
}

#[test]
fn complete_against_brute_force() {
    let cases = [
        ("1/5:4/5", "1/5:4/5", rat(3, 2), 5, 20, 150),
        ("1/3:2/5", "3/5:7/10", rat(5, 4), 3, 2, 300),
        ("11/100:89/100", "1/2:3/5", rat(2, 1), 2, 40, 250),
        ("2/7:2/7+1/1000", "1/5:4/5", rat(7, 5), 4, 10, 300),
    ];
    for (i, j, tau, m, lo, hi) in cases {
        let parse = |s: &str| -> RatInterval {
            if let Some((a, b)) = s.split_once('+') {
                let x = ulc_core::ratcore::parse_rational(a.split(':').next().unwrap()).unwrap();
                RatInterval::new(x.clone(), x + ulc_core::ratcore::parse_rational(b).unwrap()).unwrap()
            } else {
                s.parse().unwrap()
            }
        };
        let (ii, jj) = (parse(i), parse(j));
        let want = brute(&ii, &jj, &tau, m, lo, hi);
        for strategy in [Strategy::Inversion, Strategy::FractionScan, Strategy::Auto] {
            let mut cfg = SearchConfig::new(ii.clone(), jj.clone(), tau.clone(), m, lo, hi);
            cfg.strategy = strategy;
            let got = find_witnesses(&cfg).unwrap();
            assert_eq!(keys(&got), want, "{i} {j} {strategy:?}");
        }
    }
}

#[test]
fn inversion_identity_and_soundness() {
    let iv: RatInterval = "1/5:4/5".parse().unwrap();
    let mut cfg = SearchConfig::new(iv.clone(), iv.clone(), rat(3, 2), 5, 50, 200);
    cfg.max_witnesses = Some(4000);
    let ws = find_witnesses(&cfg).unwrap();
    assert!(!ws.is_empty());
    for w in &ws {
        let Quadruple { p, q, r, s } = w.quadruple;
        let (u, v) = w.quadruple.numerators();
        assert!(zaremba_numerators(q, 5).contains(u));
        assert!(zaremba_numerators(s, 5).contains(v));
        let x = frac(&BigRational::new(BigInt::from(p * s), BigInt::from(q)));
        assert_eq!(x, rat(u as i64, q as i64));
        let again = verify_witness(&w.quadruple, &iv, &iv, &rat(3, 2), 5);
        assert!(again.passed());
        assert_eq!(&again, w);
        let y = frac(&BigRational::new(BigInt::from(q * r), BigInt::from(s)));
        assert_eq!(y, rat(v as i64, s as i64));
    }
}

#[test]
fn left_margin_and_cap() {
    let iv: RatInterval = "1/5:4/5".parse().unwrap();
    let mut cfg = SearchConfig::new(iv.clone(), iv.clone(), rat(3, 2), 5, 50, 120);
    let all = find_witnesses(&cfg).unwrap();
    cfg.max_witnesses = Some(7);
    assert_eq!(keys(&find_witnesses(&cfg).unwrap()), keys(&all[..7]));
    cfg.max_witnesses = None;
    cfg.left_margin = rat(1, 10);
    let shrunk = find_witnesses(&cfg).unwrap();
    let expect: Vec<_> = all
        .iter()
        .filter(|w| rat(w.quadruple.p as i64, w.quadruple.q as i64) <= rat(7, 10))
        .filter(|w| rat(w.quadruple.r as i64, w.quadruple.s as i64) <= rat(7, 10))
        .map(|w| w.quadruple.key())
        .collect();
    assert_eq!(keys(&shrunk), expect);
}

#[test]
fn thread_count_independent() {
    let iv: RatInterval = "1/4:3/4".parse().unwrap();
    let mut cfg = SearchConfig::new(iv.clone(), iv, rat(4, 3), 3, 100, 900);
    cfg.max_witnesses = Some(20_000);
    let run = |t: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
        pool.install(|| serde_json::to_string(&find_witnesses(&cfg).unwrap()).unwrap())
    };
    assert_eq!(run(1), run(8));
}
